#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "culr/corpus.hpp"
#include "json.hpp"

namespace culr {

struct FeatureConfig {
  unsigned hash_bits = 18;
  /// Neighbor sentences on each side concatenated into a sentence's vector.
  unsigned window = 1;
  bool bigrams = true;
  /// Width of externally supplied sentence embeddings (0 = none).
  std::size_t embedding_dim = 0;
};

/// Sorted, duplicate-free sparse vector.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
};

/// One sparse feature row per sentence.
using EncodedDocument = std::vector<SparseVector>;

/// Precomputed sentence vectors keyed by document id and sentence index.
/// File lines: `doc_id<TAB>sentence_index<TAB>f_1 ... f_d`.
class SentenceEmbeddings {
 public:
  static SentenceEmbeddings read(std::istream& in);

  std::size_t dim() const { return dim_; }
  bool empty() const { return rows_.empty(); }
  /// nullptr when the sentence has no vector.
  const std::vector<double>* find(const std::string& doc_id, std::size_t sentence) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::unordered_map<std::size_t, std::vector<double>>> rows_;
};

/// Hashed unigram/bigram tf-idf features with dense extras (bias, relative
/// position, log length) and optional external embeddings, concatenated over
/// a window of neighboring sentences.
class FeatureEncoder {
 public:
  static constexpr std::size_t kDenseExtras = 3;

  FeatureEncoder() = default;
  explicit FeatureEncoder(FeatureConfig config);

  /// Document frequencies over the sentences of `docs`.
  void fit(const std::vector<const Document*>& docs);

  const FeatureConfig& config() const { return config_; }
  std::size_t hash_dim() const { return std::size_t{1} << config_.hash_bits; }
  std::size_t block_dim() const { return hash_dim() + kDenseExtras + config_.embedding_dim; }
  std::size_t feature_dim() const { return (2 * config_.window + 1) * block_dim(); }
  double idf(std::uint32_t bucket) const;

  /// Features of sentence `i` alone (one block, indices < block_dim()).
  SparseVector encode_sentence(const Document& doc, std::size_t i,
                               const SentenceEmbeddings* embeddings = nullptr) const;

  /// True when `feature` falls in a hashed (droppable) region of some block.
  bool is_hashed(std::uint32_t feature) const { return feature % block_dim() < hash_dim(); }

  nlohmann::json to_json() const;
  static FeatureEncoder from_json(const nlohmann::json& j);

 private:
  FeatureConfig config_;
  std::size_t fit_sentences_ = 0;
  std::unordered_map<std::uint32_t, std::uint32_t> doc_freq_;
};

/// Sentence i gets its own block plus blocks for i-w..i+w; missing neighbors
/// leave their block empty.
EncodedDocument encode_document(const FeatureEncoder& encoder, const Document& doc,
                                const SentenceEmbeddings* embeddings = nullptr);

/// Inverted dropout on hashed features: each is zeroed with probability `rate`
/// and survivors are scaled by 1 / (1 - rate). Dense extras are kept.
EncodedDocument feature_dropout(const EncodedDocument& features, const FeatureEncoder& encoder,
                                double rate, std::mt19937_64& rng);

}  // namespace culr
