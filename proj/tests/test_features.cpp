#include <cmath>
#include <random>
#include <sstream>

#include "culr/error.hpp"
#include "culr/features.hpp"
#include "culr/hashing.hpp"
#include "culr/labeler.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace culr;
using doctest::Approx;

namespace {

Document text_doc(std::vector<std::string> sentences) {
  Document d;
  d.id = "t";
  d.sentences = std::move(sentences);
  d.labels.assign(d.sentences.size(), 0);
  return d;
}

std::size_t blocks_touched(const SparseVector& v, std::size_t block) {
  std::vector<bool> seen;
  for (auto idx : v.index) {
    const std::size_t b = idx / block;
    if (seen.size() <= b) seen.resize(b + 1);
    seen[b] = true;
  }
  std::size_t n = 0;
  for (bool s : seen) n += s;
  return n;
}

}  // namespace

TEST_CASE("hashing helpers") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello world\n") == "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST_CASE("sentence encoding is tf-idf normalized with dense extras") {
  const Document d = text_doc({"alpha beta alpha", "gamma", "beta"});
  FeatureEncoder enc(FeatureConfig{10, 0, false, 0});
  enc.fit({&d});
  const SparseVector v = enc.encode_sentence(d, 0);
  CHECK(std::is_sorted(v.index.begin(), v.index.end()));
  double norm2 = 0.0;
  for (std::size_t k = 0; k < v.nnz(); ++k) {
    if (enc.is_hashed(v.index[k])) norm2 += v.value[k] * v.value[k];
  }
  CHECK(norm2 == Approx(1.0).epsilon(1e-12));
  // alpha: tf 2, df 1 of 3 sentences; beta: tf 1, df 2.
  const double a = 2.0 * (std::log(4.0 / 2.0) + 1.0);
  const double b = 1.0 * (std::log(4.0 / 3.0) + 1.0);
  CHECK(enc.idf(static_cast<std::uint32_t>(fnv1a64("u:alpha") & 1023)) == Approx(std::log(2.0) + 1.0));
  const auto alpha_bucket = static_cast<std::uint32_t>(fnv1a64("u:alpha") & 1023);
  for (std::size_t k = 0; k < v.nnz(); ++k) {
    if (v.index[k] == alpha_bucket) CHECK(v.value[k] == Approx(a / std::hypot(a, b)).epsilon(1e-12));
  }
  const auto D = static_cast<std::uint32_t>(enc.hash_dim());
  CHECK(v.index[v.nnz() - 3] == D);
  CHECK(v.value[v.nnz() - 3] == 1.0);
  const SparseVector last = enc.encode_sentence(d, 2);
  CHECK(last.value[last.nnz() - 2] == Approx(2.0 / 3.0));
  CHECK(last.value[last.nnz() - 1] == Approx(std::log(2.0)));
}

TEST_CASE("window concatenation") {
  const Document three = text_doc({"one two", "three four", "five"});
  FeatureEncoder w0(FeatureConfig{8, 0, true, 0});
  w0.fit({&three});
  const auto e0 = encode_document(w0, three);
  for (const auto& row : e0) CHECK(blocks_touched(row, w0.block_dim()) == 1);

  FeatureEncoder w1(FeatureConfig{8, 1, true, 0});
  w1.fit({&three});
  const auto e1 = encode_document(w1, three);
  CHECK(w1.feature_dim() == 3 * w1.block_dim());
  CHECK(blocks_touched(e1[1], w1.block_dim()) == 3);
  // The middle row's own block equals the sentence encoding shifted by one block.
  const SparseVector own = w1.encode_sentence(three, 1);
  std::size_t matched = 0;
  for (std::size_t k = 0; k < e1[1].nnz(); ++k) {
    const auto idx = e1[1].index[k];
    if (idx / w1.block_dim() != 1) continue;
    CHECK(idx - w1.block_dim() == own.index[matched]);
    CHECK(e1[1].value[k] == own.value[matched]);
    ++matched;
  }
  CHECK(matched == own.nnz());

  const Document one = text_doc({"alone here"});
  const auto single = encode_document(w1, one);
  for (auto idx : single[0].index) CHECK(idx / w1.block_dim() == 1);
}

TEST_CASE("feature dropout keeps dense extras and rescales survivors") {
  const Document d = text_doc({"a b c d e f g h i j k l m n o p"});
  FeatureEncoder enc(FeatureConfig{12, 0, true, 0});
  enc.fit({&d});
  const auto full = encode_document(enc, d);
  std::mt19937_64 rng(4);
  const auto dropped = feature_dropout(full, enc, 0.5, rng);
  std::size_t dense = 0;
  for (std::size_t k = 0; k < dropped[0].nnz(); ++k) {
    const auto idx = dropped[0].index[k];
    if (!enc.is_hashed(idx)) {
      ++dense;
      continue;
    }
    const auto pos = std::find(full[0].index.begin(), full[0].index.end(), idx) - full[0].index.begin();
    CHECK(dropped[0].value[k] == Approx(2.0 * full[0].value[static_cast<std::size_t>(pos)]));
  }
  CHECK(dense == FeatureEncoder::kDenseExtras);
  CHECK(dropped[0].nnz() < full[0].nnz());
  std::mt19937_64 rng2(4);
  CHECK(feature_dropout(full, enc, 0.0, rng2)[0].value == full[0].value);
}

TEST_CASE("external sentence embeddings") {
  std::istringstream in("t\t0\t0.5 -1\nt\t1\t0 2\n");
  const SentenceEmbeddings emb = SentenceEmbeddings::read(in);
  CHECK(emb.dim() == 2);
  const Document d = text_doc({"x", "y"});
  FeatureEncoder enc(FeatureConfig{6, 0, false, 2});
  enc.fit({&d});
  const SparseVector v = enc.encode_sentence(d, 0, &emb);
  CHECK(v.index.back() == enc.hash_dim() + FeatureEncoder::kDenseExtras + 1);
  CHECK(v.value.back() == -1.0);
  CHECK_THROWS_AS(enc.encode_sentence(d, 0, nullptr), DataError);
  std::istringstream bad("t\t0\t1 2\nt\t1\t1\n");
  CHECK_THROWS_AS(SentenceEmbeddings::read(bad), DataError);
}

TEST_CASE("encoder JSON round-trip reproduces encodings") {
  const Document d = text_doc({"the court held", "appeal dismissed", "the appeal"});
  FeatureEncoder enc(FeatureConfig{9, 1, true, 0});
  enc.fit({&d});
  const FeatureEncoder back = FeatureEncoder::from_json(enc.to_json());
  const auto a = encode_document(enc, d);
  const auto b = encode_document(back, d);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].index == b[i].index);
    CHECK(a[i].value == b[i].value);
  }
}

TEST_CASE("emission scores are dot products") {
  std::mt19937_64 rng(21);
  const Document d = text_doc({"w1 w2 w3", "w2 w4", "w5 w1 w1", "w6"});
  FeatureEncoder enc(FeatureConfig{7, 1, true, 0});
  enc.fit({&d});
  const auto feats = encode_document(enc, d);
  LabelerParams p = LabelerParams::zeros(3, enc.feature_dim(), HeadKind::crf);
  CHECK(emission_scores(feats, p).isZero(0.0));
  p.emission = oracle::random_matrix(3, static_cast<Eigen::Index>(enc.feature_dim()), rng);
  const Eigen::MatrixXd s = emission_scores(feats, p);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    Eigen::VectorXd dense = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(enc.feature_dim()));
    for (std::size_t k = 0; k < feats[i].nnz(); ++k) dense(feats[i].index[k]) = feats[i].value[k];
    for (Eigen::Index y = 0; y < 3; ++y) {
      CHECK(std::abs(s(static_cast<Eigen::Index>(i), y) - p.emission.row(y).dot(dense)) < 1e-12);
    }
  }

  EncodedDocument onehot(1);
  onehot[0].index = {5};
  onehot[0].value = {1.0};
  LabelerParams q = LabelerParams::zeros(2, 10, HeadKind::softmax);
  q.emission(1, 5) = 2.0;
  const Eigen::MatrixXd t = emission_scores(onehot, q);
  CHECK(t(0, 1) == 2.0);
  CHECK(t(0, 0) == 0.0);
}
