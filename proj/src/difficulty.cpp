#include "culr/difficulty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "culr/error.hpp"

namespace culr {

std::string_view to_string(DifficultyMetric metric) {
  switch (metric) {
    case DifficultyMetric::shifts: return "shifts";
    case DifficultyMetric::expert_inversions: return "expert-inv";
    case DifficultyMetric::data_inversions: return "data-inv";
    case DifficultyMetric::neg_loglik: return "neg-loglik";
  }
  return "shifts";
}

DifficultyMetric parse_difficulty_metric(std::string_view text) {
  if (text == "shifts") return DifficultyMetric::shifts;
  if (text == "expert-inv") return DifficultyMetric::expert_inversions;
  if (text == "data-inv") return DifficultyMetric::data_inversions;
  if (text == "neg-loglik") return DifficultyMetric::neg_loglik;
  throw DataError("unknown difficulty metric: " + std::string(text));
}

namespace {

std::uint64_t sort_and_count(std::span<int> keys, std::span<int> scratch) {
  const std::size_t n = keys.size();
  if (n < 2) return 0;
  const std::size_t mid = n / 2;
  std::uint64_t count = sort_and_count(keys.first(mid), scratch.first(mid)) +
                        sort_and_count(keys.subspan(mid), scratch.subspan(mid));
  std::size_t i = 0, j = mid, k = 0;
  while (i < mid && j < n) {
    // `<=` keeps equal keys in place, so ties never count.
    if (keys[i] <= keys[j]) {
      scratch[k++] = keys[i++];
    } else {
      count += mid - i;
      scratch[k++] = keys[j++];
    }
  }
  while (i < mid) scratch[k++] = keys[i++];
  while (j < n) scratch[k++] = keys[j++];
  std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(n), keys.begin());
  return count;
}

}  // namespace

std::uint64_t count_inversions(std::span<const int> keys) {
  std::vector<int> work(keys.begin(), keys.end());
  std::vector<int> scratch(keys.size());
  return sort_and_count(work, scratch);
}

DifficultyScore score_rhetorical_shifts(const Document& doc) {
  const auto& l = doc.labels;
  std::size_t shifts = 0;
  for (std::size_t i = 0; i + 1 < l.size(); ++i) {
    if (l[i] != l[i + 1]) ++shifts;
  }
  const double m = static_cast<double>(l.size());
  return {doc.id, DifficultyMetric::shifts, m > 0 ? static_cast<double>(shifts) / m : 0.0,
          static_cast<double>(shifts)};
}

DifficultyScore score_inversions(const Document& doc, const CanonicalOrder& order,
                                 DifficultyMetric metric) {
  std::vector<int> keys;
  keys.reserve(doc.size());
  for (RoleId l : doc.labels) {
    if (l >= order.ranks.size() || order.ranks[l] < 0) {
      throw DataError("document " + doc.id + ": label without a canonical rank");
    }
    keys.push_back(order.ranks[l]);
  }
  const std::uint64_t inv = count_inversions(keys);
  const double m = static_cast<double>(keys.size());
  const double pairs = m * (m - 1.0) / 2.0;
  return {doc.id, metric, pairs > 0 ? static_cast<double>(inv) / pairs : 0.0,
          static_cast<double>(inv)};
}

DifficultyScore score_neg_loglik(const Document& doc, const TransitionMatrix& tm,
                                 bool include_start) {
  const auto& l = doc.labels;
  double loglik = 0.0;
  auto add = [&](double p, const char* what) {
    if (!(p > 0.0)) {
      throw InfiniteDifficultyError("document " + doc.id + ": zero-probability " + what +
                                    " (infinite difficulty; use alpha > 0)");
    }
    loglik += std::log(p);
  };
  if (include_start) add(tm.start_prob(l.front()), "initial role");
  for (std::size_t i = 0; i + 1 < l.size(); ++i) add(tm.prob(l[i], l[i + 1]), "transition");
  const double total = -loglik;
  // -0.0 from a certain sequence reads oddly in reports.
  const double value = total / static_cast<double>(l.size()) + 0.0;
  return {doc.id, DifficultyMetric::neg_loglik, value, total + 0.0};
}

std::size_t BucketAssignment::num_documents() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.size();
  return n;
}

BucketAssignment rank_and_bucket(std::vector<DifficultyScore> scores, std::size_t num_buckets) {
  if (num_buckets == 0) throw DataError("number of buckets must be at least 1");
  if (num_buckets > scores.size()) {
    throw DataError("cannot cut " + std::to_string(scores.size()) + " documents into " +
                    std::to_string(num_buckets) + " buckets");
  }
  for (const auto& s : scores) {
    if (std::isnan(s.value)) throw NumericalError("difficulty of " + s.doc_id + " is NaN");
  }
  std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.doc_id < b.doc_id;
  });

  const std::size_t n = scores.size();
  const std::size_t base = n / num_buckets;
  const std::size_t extra = n % num_buckets;
  BucketAssignment out;
  out.buckets.resize(num_buckets);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < num_buckets; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) out.buckets[b].push_back(scores[pos++].doc_id);
  }
  return out;
}

std::vector<DifficultyScore> score_documents(const std::vector<const Document*>& docs,
                                             DifficultyMetric metric, const ScoringInputs& inputs) {
  std::vector<DifficultyScore> out;
  out.reserve(docs.size());
  switch (metric) {
    case DifficultyMetric::shifts:
      for (const auto* d : docs) out.push_back(score_rhetorical_shifts(*d));
      break;
    case DifficultyMetric::expert_inversions:
      if (!inputs.expert_order) throw DataError("expert-inv needs an expert discourse order");
      for (const auto* d : docs) {
        out.push_back(score_inversions(*d, *inputs.expert_order, DifficultyMetric::expert_inversions));
      }
      break;
    case DifficultyMetric::data_inversions: {
      if (!inputs.transitions) throw DataError("data-inv needs a transition matrix");
      const CanonicalOrder order = derive_canonical_order(*inputs.transitions);
      for (const auto* d : docs) out.push_back(score_inversions(*d, order));
      break;
    }
    case DifficultyMetric::neg_loglik:
      if (!inputs.transitions) throw DataError("neg-loglik needs a transition matrix");
      for (const auto* d : docs) {
        out.push_back(score_neg_loglik(*d, *inputs.transitions, inputs.include_start));
      }
      break;
  }
  return out;
}

}  // namespace culr
