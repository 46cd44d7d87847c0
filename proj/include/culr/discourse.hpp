#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "culr/corpus.hpp"
#include "json.hpp"

namespace culr {

/// First-order role transition model with a synthetic START state.
///
/// `probs` and `counts` are (|L|+1) x |L|: row 0 is START, row a+1 is role a.
struct TransitionMatrix {
  Eigen::MatrixXd probs;
  Eigen::MatrixXd counts;
  double alpha = 1.0;
  /// Label frequencies of the estimation documents, used for tie-breaking.
  std::vector<std::size_t> role_counts;
  /// Source rows (0 = START) with no observations under alpha = 0; set to uniform.
  std::vector<std::size_t> undefined_rows;

  std::size_t num_roles() const { return static_cast<std::size_t>(probs.cols()); }
  double start_prob(RoleId to) const { return probs(0, to); }
  double prob(RoleId from, RoleId to) const { return probs(from + 1, to); }
};

/// P(b | a) = (count(a->b) + alpha) / (sum_c count(a->c) + alpha * |L|), with
/// the START row estimated from document-initial labels.
TransitionMatrix estimate_transition_matrix(const std::vector<const Document*>& docs,
                                            std::size_t num_roles, double alpha = 1.0);

/// Recomputes `probs` from `counts` and `alpha`.
void renormalize(TransitionMatrix& tm);

nlohmann::json to_json(const TransitionMatrix& tm, const RoleInventory& inventory);

enum class OrderSource { expert, data_derived };

/// Position of every role in a canonical discourse order (0 = earliest).
struct CanonicalOrder {
  std::vector<int> ranks;  // indexed by role id
  OrderSource source = OrderSource::data_derived;

  /// Role ids sorted by rank.
  std::vector<RoleId> sequence() const;
};

/// Greedy walk: start at the most likely initial role, then repeatedly take the
/// most probable unvisited successor. Ties go to the more frequent role, then
/// the lower id.
CanonicalOrder derive_canonical_order(const TransitionMatrix& tm);

/// One role name per line. Inventory roles missing from the file are appended
/// in descending `role_counts` order (ties by id).
CanonicalOrder load_expert_order(std::istream& in, const RoleInventory& inventory,
                                 const std::vector<std::size_t>& role_counts);

}  // namespace culr
