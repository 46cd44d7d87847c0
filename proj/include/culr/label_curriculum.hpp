#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "culr/corpus.hpp"
#include "json.hpp"

namespace culr {

enum class SimilaritySource { confusion, embedding };

std::string_view to_string(SimilaritySource source);
SimilaritySource parse_similarity_source(std::string_view text);

/// Symmetric, non-negative role similarity with a zero diagonal.
struct SimilarityMatrix {
  Eigen::MatrixXd sim;
  SimilaritySource source = SimilaritySource::confusion;
  /// Set when the off-diagonal was all zero and replaced by a uniform one.
  bool uniform_fallback = false;
};

/// sim_ij = (C_ij + C_ji) / 2 off the diagonal. An all-zero off-diagonal
/// (a perfect model) falls back to uniform similarity.
SimilarityMatrix similarity_from_confusion(const Eigen::MatrixXd& confusion);

/// sim_ij = max(0, cos(v_i, v_j)) off the diagonal. Vectors are indexed by role id.
SimilarityMatrix similarity_from_embeddings(const std::vector<std::vector<double>>& vectors);

/// Reads `role<TAB>f_1 f_2 ... f_d` lines and returns vectors in inventory order.
/// Every inventory role must be present; extra roles are an error.
std::vector<std::vector<double>> load_label_embeddings(std::istream& in,
                                                       const RoleInventory& inventory);

/// Reads the same format without an inventory: names in file order.
std::vector<std::pair<std::string, std::vector<double>>> read_label_embeddings(std::istream& in);

/// Row-stochastic soft-target matrix annealed toward the identity.
struct TargetMatrix {
  Eigen::MatrixXd v;
  int step = 0;
  double epsilon = 0.9;
  /// Rows whose similarity had no off-diagonal mass and used a uniform row.
  std::vector<RoleId> uniform_rows;

  std::size_t size() const { return static_cast<std::size_t>(v.rows()); }
  /// Off-diagonal row mass S_i.
  double off_diagonal_mass(Eigen::Index row) const;
  /// max_i S_i.
  double max_off_diagonal_mass() const;
  double max_off_diagonal() const;
  /// True when every off-diagonal entry is below `tolerance`.
  bool near_identity(double tolerance = 1e-4) const;
};

/// Row i = (1 - eta) e_i + eta * (similarity row i normalized to sum 1).
TargetMatrix init_target_matrix(const SimilarityMatrix& sim, double eta, double epsilon);

TargetMatrix identity_targets(std::size_t num_roles, double epsilon = 0.9);

/// One decay step: with S_i the off-diagonal mass of row i,
/// v_ii <- 1 / (1 + eps S_i) and v_ij <- eps v_ij / (1 + eps S_i).
TargetMatrix update_target_matrix(const TargetMatrix& targets);

/// Row `label` of V.
std::vector<double> soft_targets_for(RoleId label, const TargetMatrix& targets);

/// Number of updates until `near_identity(tolerance)`, capped at `max_steps`
/// when it is non-zero.
int annealing_steps(const TargetMatrix& initial, double tolerance = 1e-4, int max_steps = 0);

nlohmann::json to_json(const SimilarityMatrix& sim, const RoleInventory& inventory);
nlohmann::json to_json(const TargetMatrix& targets, const RoleInventory& inventory);

}  // namespace culr
