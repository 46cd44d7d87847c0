#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "culr/corpus.hpp"
#include "culr/discourse.hpp"

namespace culr {

enum class DifficultyMetric { shifts, expert_inversions, data_inversions, neg_loglik };

/// CLI spelling: shifts | expert-inv | data-inv | neg-loglik.
std::string_view to_string(DifficultyMetric metric);
DifficultyMetric parse_difficulty_metric(std::string_view text);

/// Per-document difficulty; higher is harder.
struct DifficultyScore {
  std::string doc_id;
  DifficultyMetric metric = DifficultyMetric::shifts;
  double value = 0.0;
  /// Unnormalized quantity behind `value`: shift count, inversion count, or
  /// total negative log-likelihood.
  double raw = 0.0;
};

/// Number of pairs i < j with keys[i] > keys[j], by merge sort in O(m log m).
/// Equal keys are not inversions.
std::uint64_t count_inversions(std::span<const int> keys);

DifficultyScore score_rhetorical_shifts(const Document& doc);

/// Inversions of the document's label ranks, normalized by C(m, 2).
DifficultyScore score_inversions(const Document& doc, const CanonicalOrder& order,
                                 DifficultyMetric metric = DifficultyMetric::data_inversions);

/// Length-normalized negative log-likelihood of the label sequence. Throws
/// InfiniteDifficultyError when a transition has probability zero.
DifficultyScore score_neg_loglik(const Document& doc, const TransitionMatrix& tm,
                                 bool include_start = true);

struct BucketAssignment {
  /// Easiest first; ids inside a bucket are in ascending (score, id) order.
  std::vector<std::vector<std::string>> buckets;

  std::size_t num_buckets() const { return buckets.size(); }
  std::size_t num_documents() const;
};

/// Sorts by (value, doc_id) and cuts into B equal-frequency buckets; the
/// remainder goes one document each to the earliest buckets.
BucketAssignment rank_and_bucket(std::vector<DifficultyScore> scores, std::size_t num_buckets);

struct ScoringInputs {
  const TransitionMatrix* transitions = nullptr;  // data-inv, neg-loglik
  const CanonicalOrder* expert_order = nullptr;   // expert-inv
  bool include_start = true;
};

/// Scores every document with the chosen metric. For data-inv the canonical
/// order is derived from `inputs.transitions`.
std::vector<DifficultyScore> score_documents(const std::vector<const Document*>& docs,
                                             DifficultyMetric metric, const ScoringInputs& inputs);

}  // namespace culr
