#include "culr/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

#include "culr/error.hpp"
#include "culr/hashing.hpp"

namespace culr {

using nlohmann::json;

SentenceEmbeddings SentenceEmbeddings::read(std::istream& in) {
  SentenceEmbeddings out;
  std::string line;
  std::size_t line_no = 0;
  bool have_dim = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw DataError("sentence embeddings line " + std::to_string(line_no) +
                      ": expected doc_id<TAB>index<TAB>values");
    }
    std::string doc = line.substr(0, t1);
    std::size_t index = 0;
    try {
      index = std::stoul(line.substr(t1 + 1, t2 - t1 - 1));
    } catch (const std::exception&) {
      throw DataError("sentence embeddings line " + std::to_string(line_no) + ": bad sentence index");
    }
    std::istringstream values(line.substr(t2 + 1));
    std::vector<double> vec;
    double x;
    while (values >> x) vec.push_back(x);
    if (!values.eof()) {
      throw DataError("sentence embeddings line " + std::to_string(line_no) + ": bad number");
    }
    if (!have_dim) {
      out.dim_ = vec.size();
      have_dim = true;
    } else if (vec.size() != out.dim_) {
      throw DataError("sentence embeddings line " + std::to_string(line_no) + ": dimension mismatch");
    }
    if (!out.rows_[doc].emplace(index, std::move(vec)).second) {
      throw DataError("sentence embeddings line " + std::to_string(line_no) + ": duplicate entry");
    }
  }
  return out;
}

const std::vector<double>* SentenceEmbeddings::find(const std::string& doc_id,
                                                    std::size_t sentence) const {
  auto d = rows_.find(doc_id);
  if (d == rows_.end()) return nullptr;
  auto s = d->second.find(sentence);
  return s == d->second.end() ? nullptr : &s->second;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint32_t> hashed_tokens(const std::string& sentence, const FeatureConfig& cfg) {
  const auto tokens = tokenize(sentence);
  const std::uint64_t mask = (std::uint64_t{1} << cfg.hash_bits) - 1;
  std::vector<std::uint32_t> buckets;
  buckets.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    buckets.push_back(static_cast<std::uint32_t>(fnv1a64("u:" + tokens[i]) & mask));
    if (cfg.bigrams && i + 1 < tokens.size()) {
      buckets.push_back(static_cast<std::uint32_t>(fnv1a64("b:" + tokens[i] + ' ' + tokens[i + 1]) & mask));
    }
  }
  return buckets;
}

}  // namespace

FeatureEncoder::FeatureEncoder(FeatureConfig config) : config_(config) {
  if (config_.hash_bits < 1 || config_.hash_bits > 26) {
    throw DataError("hash bits must lie in [1, 26]");
  }
}

void FeatureEncoder::fit(const std::vector<const Document*>& docs) {
  doc_freq_.clear();
  fit_sentences_ = 0;
  for (const auto* doc : docs) {
    for (const auto& sentence : doc->sentences) {
      ++fit_sentences_;
      auto buckets = hashed_tokens(sentence, config_);
      std::sort(buckets.begin(), buckets.end());
      buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
      for (auto b : buckets) ++doc_freq_[b];
    }
  }
}

double FeatureEncoder::idf(std::uint32_t bucket) const {
  auto it = doc_freq_.find(bucket);
  const double df = it == doc_freq_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(fit_sentences_)) / (1.0 + df)) + 1.0;
}

SparseVector FeatureEncoder::encode_sentence(const Document& doc, std::size_t i,
                                             const SentenceEmbeddings* embeddings) const {
  const auto buckets = hashed_tokens(doc.sentences.at(i), config_);
  std::map<std::uint32_t, double> tf;
  for (auto b : buckets) tf[b] += 1.0;

  SparseVector out;
  double norm2 = 0.0;
  for (auto& [b, count] : tf) {
    count *= idf(b);
    norm2 += count * count;
  }
  const double inv_norm = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
  for (const auto& [b, weight] : tf) {
    out.index.push_back(b);
    out.value.push_back(weight * inv_norm);
  }

  const auto D = static_cast<std::uint32_t>(hash_dim());
  const double m = static_cast<double>(doc.size());
  out.index.push_back(D);
  out.value.push_back(1.0);
  out.index.push_back(D + 1);
  out.value.push_back(static_cast<double>(i) / m);
  out.index.push_back(D + 2);
  out.value.push_back(std::log1p(static_cast<double>(tokenize(doc.sentences[i]).size())));

  if (config_.embedding_dim > 0) {
    const std::vector<double>* vec = embeddings ? embeddings->find(doc.id, i) : nullptr;
    if (!vec) {
      throw DataError("no sentence embedding for " + doc.id + " sentence " + std::to_string(i));
    }
    if (vec->size() != config_.embedding_dim) throw DataError("sentence embedding dimension mismatch");
    for (std::size_t k = 0; k < vec->size(); ++k) {
      if ((*vec)[k] == 0.0) continue;
      out.index.push_back(D + static_cast<std::uint32_t>(kDenseExtras + k));
      out.value.push_back((*vec)[k]);
    }
  }
  return out;
}

json FeatureEncoder::to_json() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> df(doc_freq_.begin(), doc_freq_.end());
  std::sort(df.begin(), df.end());
  json entries = json::array();
  for (const auto& [b, n] : df) entries.push_back({b, n});
  return {{"hash_bits", config_.hash_bits},
          {"window", config_.window},
          {"bigrams", config_.bigrams},
          {"embedding_dim", config_.embedding_dim},
          {"fit_sentences", fit_sentences_},
          {"doc_freq", std::move(entries)}};
}

FeatureEncoder FeatureEncoder::from_json(const json& j) {
  FeatureConfig cfg;
  cfg.hash_bits = j.at("hash_bits").get<unsigned>();
  cfg.window = j.at("window").get<unsigned>();
  cfg.bigrams = j.at("bigrams").get<bool>();
  cfg.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  FeatureEncoder enc(cfg);
  enc.fit_sentences_ = j.at("fit_sentences").get<std::size_t>();
  for (const auto& e : j.at("doc_freq")) {
    enc.doc_freq_[e.at(0).get<std::uint32_t>()] = e.at(1).get<std::uint32_t>();
  }
  return enc;
}

EncodedDocument encode_document(const FeatureEncoder& encoder, const Document& doc,
                                const SentenceEmbeddings* embeddings) {
  const std::size_t m = doc.size();
  std::vector<SparseVector> own;
  own.reserve(m);
  for (std::size_t i = 0; i < m; ++i) own.push_back(encoder.encode_sentence(doc, i, embeddings));

  const auto w = static_cast<std::ptrdiff_t>(encoder.config().window);
  const auto block = static_cast<std::uint32_t>(encoder.block_dim());
  EncodedDocument out(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& row = out[i];
    for (std::ptrdiff_t o = -w; o <= w; ++o) {
      const auto j = static_cast<std::ptrdiff_t>(i) + o;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(m)) continue;
      const auto offset = static_cast<std::uint32_t>(o + w) * block;
      const auto& src = own[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < src.nnz(); ++k) {
        row.index.push_back(offset + src.index[k]);
        row.value.push_back(src.value[k]);
      }
    }
  }
  return out;
}

EncodedDocument feature_dropout(const EncodedDocument& features, const FeatureEncoder& encoder,
                                double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return features;
  if (rate >= 1.0) throw DataError("dropout rate must be below 1");
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  EncodedDocument out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& src = features[i];
    auto& dst = out[i];
    dst.index.reserve(src.nnz());
    dst.value.reserve(src.nnz());
    for (std::size_t k = 0; k < src.nnz(); ++k) {
      if (encoder.is_hashed(src.index[k])) {
        if (!keep(rng)) continue;
        dst.index.push_back(src.index[k]);
        dst.value.push_back(src.value[k] * scale);
      } else {
        dst.index.push_back(src.index[k]);
        dst.value.push_back(src.value[k]);
      }
    }
  }
  return out;
}

}  // namespace culr
