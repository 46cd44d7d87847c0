#pragma once

#include <Eigen/Dense>
#include <vector>

#include "culr/corpus.hpp"

namespace culr {

// Linear-chain CRF over m positions and L labels.
//
// `emissions` is m x L. `transitions` is (L+1) x (L+1): entry (a, b) scores
// a -> b for a, b < L, row L holds START -> b and column L holds a -> STOP.
// Entry (L, L) is unused.

struct CrfMarginals {
  double log_partition = 0.0;
  Eigen::MatrixXd node;               // m x L
  std::vector<Eigen::MatrixXd> edge;  // m-1 matrices, L x L
};

/// Log-space forward-backward.
CrfMarginals crf_forward_backward(const Eigen::MatrixXd& emissions,
                                  const Eigen::MatrixXd& transitions);

/// Highest-scoring path; ties go to the lower label at every back-pointer.
std::vector<RoleId> crf_viterbi(const Eigen::MatrixXd& emissions, const Eigen::MatrixXd& transitions);

/// Unnormalized score of `path`, including START and STOP transitions.
double crf_path_score(const Eigen::MatrixXd& emissions, const Eigen::MatrixXd& transitions,
                      const std::vector<RoleId>& path);

/// Loss plus gradients with respect to the emission and transition scores.
struct ScoreGradient {
  double loss = 0.0;
  Eigen::MatrixXd d_emissions;
  Eigen::MatrixXd d_transitions;
};

/// (log Z - score(gold)) / m.
ScoreGradient crf_nll(const Eigen::MatrixXd& emissions, const Eigen::MatrixXd& transitions,
                      const std::vector<RoleId>& gold);

/// -(1/m) sum_i sum_y targets(i, y) log marginal(i, y), with the gradient
/// propagated back through the forward and backward recursions.
ScoreGradient crf_marginal_cross_entropy(const Eigen::MatrixXd& emissions,
                                         const Eigen::MatrixXd& transitions,
                                         const Eigen::MatrixXd& targets);

/// -(1/m) sum_i sum_y targets(i, y) log softmax(emissions_i)_y. Transition
/// gradient is all zero.
ScoreGradient softmax_cross_entropy(const Eigen::MatrixXd& emissions,
                                    const Eigen::MatrixXd& transitions,
                                    const Eigen::MatrixXd& targets);

}  // namespace culr
