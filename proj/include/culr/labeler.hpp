#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "culr/corpus.hpp"
#include "culr/crf.hpp"
#include "culr/features.hpp"
#include "culr/label_curriculum.hpp"
#include "json.hpp"

namespace culr {

enum class HeadKind { crf, softmax };

std::string_view to_string(HeadKind head);
HeadKind parse_head_kind(std::string_view text);

struct LabelerParams {
  Eigen::MatrixXd emission;    // L x feature_dim; column k holds every role's weight for feature k
  Eigen::MatrixXd transition;  // (L+1) x (L+1), see crf.hpp
  HeadKind head = HeadKind::crf;

  static LabelerParams zeros(std::size_t num_roles, std::size_t feature_dim, HeadKind head);
  std::size_t num_roles() const { return static_cast<std::size_t>(emission.rows()); }
  bool all_finite() const { return emission.allFinite() && transition.allFinite(); }
};

struct LabelerGradient {
  Eigen::MatrixXd emission;
  Eigen::MatrixXd transition;

  static LabelerGradient zeros_like(const LabelerParams& params);
  void set_zero();
};

/// score(i, y) = emission.row(y) . features_i
Eigen::MatrixXd emission_scores(const EncodedDocument& features, const LabelerParams& params);

/// Gold one-hot rows, m x L.
Eigen::MatrixXd one_hot_targets(const Document& doc, std::size_t num_roles);
/// Rows of V indexed by the gold labels, m x L.
Eigen::MatrixXd soft_targets(const Document& doc, const TargetMatrix& targets);

/// Loss on score space for the given head. A CRF with exactly one-hot targets
/// uses the gold-path NLL; any other targets use marginal cross-entropy.
/// Throws std::invalid_argument when a target row is not a distribution.
ScoreGradient sequence_loss(const Eigen::MatrixXd& emissions, const Eigen::MatrixXd& transitions,
                            const Eigen::MatrixXd& targets, HeadKind head);

/// Adds `scale` times the parameter gradient into `grad` and returns the loss.
double accumulate_loss_and_gradient(const EncodedDocument& features, const Eigen::MatrixXd& targets,
                                    const LabelerParams& params, LabelerGradient& grad,
                                    double scale = 1.0);

struct LossAndGradient {
  double loss = 0.0;
  LabelerGradient gradient;
};

LossAndGradient loss_and_gradient(const EncodedDocument& features, const Eigen::MatrixXd& targets,
                                  const LabelerParams& params);

/// Viterbi for a CRF head, per-sentence argmax for softmax.
std::vector<RoleId> predict(const EncodedDocument& features, const LabelerParams& params);

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  void reset(std::size_t size);
};

/// Bias-corrected Adam update in place. Throws NumericalError, leaving params
/// and state untouched, if the gradient has a non-finite entry.
void adam_step(std::span<double> params, std::span<const double> grad, const AdamConfig& config,
               AdamState& state);

/// One Adam state per parameter tensor of a LabelerParams.
struct LabelerOptimizer {
  AdamConfig config;
  AdamState emission;
  AdamState transition;

  explicit LabelerOptimizer(const LabelerParams& params, AdamConfig config = {});
  void reset(const LabelerParams& params);
  void step(LabelerParams& params, const LabelerGradient& grad);
};

// ---------------------------------------------------------------------------
// Checkpoint

struct Model {
  RoleInventory inventory;
  FeatureEncoder encoder;
  LabelerParams params;
};

inline constexpr int kCheckpointVersion = 1;

nlohmann::json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace culr
