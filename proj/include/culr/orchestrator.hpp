#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "culr/corpus.hpp"
#include "culr/difficulty.hpp"
#include "culr/discourse.hpp"
#include "culr/features.hpp"
#include "culr/label_curriculum.hpp"
#include "culr/labeler.hpp"
#include "culr/metrics.hpp"
#include "culr/pacing.hpp"
#include "json.hpp"

namespace culr {

enum class StrategyMode {
  baseline,
  dc_only,
  rc_only,
  hierarchical,          // RC outside, DC inside
  reverse_hierarchical,  // DC outside, RC inside
  sequential_dc_rc,
  sequential_rc_dc,
};

std::string_view to_string(StrategyMode mode);
/// Accepts the canonical names plus `dc`, `rc`, `hiculr`, `reverse-hiculr`,
/// `seq-dc-rc`, `seq-rc-dc` and dash/underscore variants.
StrategyMode parse_strategy_mode(std::string_view text);

bool uses_document_curriculum(StrategyMode mode);
bool uses_role_curriculum(StrategyMode mode);

struct StrategyConfig {
  StrategyMode mode = StrategyMode::baseline;

  DifficultyMetric dc_metric = DifficultyMetric::neg_loglik;
  std::size_t num_buckets = 5;
  std::size_t epochs_per_stage = 2;
  double alpha = 1.0;  // transition smoothing for data-based metrics
  bool include_start = true;

  SimilaritySource rc_source = SimilaritySource::confusion;
  double epsilon = 0.9;
  double eta = 0.5;
  std::size_t rc_interval = 5;
  /// Cap on target-matrix updates per annealing cycle (0 = until near identity).
  std::size_t max_rc_steps = 0;
  double identity_tolerance = 1e-4;

  /// Minimum number of epochs; curricula that need more are run to completion.
  std::size_t total_epochs = 40;
  std::size_t batch_size = 4;
  double lr = 0.01;
  double dropout = 0.5;
  bool reset_optimizer = false;
  std::uint64_t seed = 0;

  HeadKind head = HeadKind::crf;
  FeatureConfig features;
};

/// Throws DataError for invalid values.
void validate(const StrategyConfig& config);

nlohmann::json to_json(const StrategyConfig& config);

/// Applies the keys of a JSON object onto `config`. Unknown keys are an error;
/// keys the mode does not use are applied but reported as warnings.
std::vector<std::string> apply_overrides(StrategyConfig& config, const nlohmann::json& overrides);

/// One epoch of a curriculum plan. `stage` indexes a schedule of `num_stages`
/// cumulative stages; num_stages == 1 means the full training set.
/// `target_step` is the index t of V^t, or -1 for one-hot targets.
struct PlannedEpoch {
  std::size_t stage = 0;
  std::size_t num_stages = 1;
  int target_step = -1;

  bool operator==(const PlannedEpoch&) const = default;
};

/// The full epoch sequence for a strategy, given B buckets and the number of
/// target-matrix updates in one annealing cycle.
std::vector<PlannedEpoch> plan_epochs(const StrategyConfig& config, std::size_t num_buckets,
                                      int rc_steps);

struct CurriculumInputs {
  const CanonicalOrder* expert_order = nullptr;
  /// Validation confusion of a random-order (baseline) model.
  std::optional<Eigen::MatrixXd> confusion;
  /// Label-description vectors indexed by role id.
  std::optional<std::vector<std::vector<double>>> label_embeddings;
  const SentenceEmbeddings* sentence_embeddings = nullptr;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t stage = 0;
  std::size_t num_stages = 1;
  int target_step = -1;
  double off_diagonal_mass = 0.0;
  std::size_t active_documents = 0;
  double train_loss = 0.0;
  double val_macro_f1 = 0.0;
  double val_micro_f1 = 0.0;
  std::vector<std::string> documents;  // training order
};

struct TrainResult {
  Model model;  // best epoch by validation micro-F1
  std::size_t best_epoch = 0;
  Metrics best_val;
  std::optional<Metrics> test;
  std::vector<PlannedEpoch> plan;
  std::vector<EpochRecord> log;
  std::optional<BabyStepSchedule> schedule;
  std::optional<TargetMatrix> initial_targets;
  int rc_steps = 0;
  std::vector<std::string> warnings;
  std::string corpus_hash;
};

/// Trains on the corpus train split and selects the best epoch on val.
TrainResult train(const Corpus& corpus, const StrategyConfig& config,
                  const CurriculumInputs& inputs = {});

/// Scores for the curriculum's difficulty metric over the train split.
std::vector<DifficultyScore> training_difficulty(const Corpus& corpus, const StrategyConfig& config,
                                                 const CurriculumInputs& inputs);

Metrics evaluate(const Model& model, const std::vector<const Document*>& docs,
                 const SentenceEmbeddings* embeddings = nullptr);

Eigen::MatrixXd confusion_matrix(const Model& model, const std::vector<const Document*>& docs,
                                 const SentenceEmbeddings* embeddings = nullptr);

nlohmann::json epoch_log_json(const TrainResult& result);
/// Best-epoch validation (and test, when present) metrics.
nlohmann::json metrics_json(const TrainResult& result);
nlohmann::json manifest_json(const TrainResult& result, const StrategyConfig& config);

/// Strategy presets for the curriculum ablation: baseline, four document
/// metrics, two similarity sources, two hierarchical variants, both
/// sequential orders and the reverse hierarchy.
struct NamedStrategy {
  std::string name;
  StrategyConfig config;
};
std::vector<NamedStrategy> ablation_strategies(const StrategyConfig& base);

// Hyperparameter grids for sweeps.
inline const std::vector<double> kLearningRateGrid{1e-5, 3e-5, 5e-5, 1e-4, 3e-4};
inline const std::vector<std::size_t> kRcIntervalGrid{5, 10, 15, 20, 25};
inline const std::vector<double> kEpsilonGrid{0.8, 0.9, 0.95, 0.99, 0.999};
inline const std::vector<std::size_t> kBucketGrid{3, 5, 7, 10, 12, 15};
inline const std::vector<std::size_t> kEpochsPerStageGrid{2, 4, 6, 8, 10};

/// Axes left empty keep the base value.
struct GridSpec {
  std::vector<double> lr;
  std::vector<std::size_t> rc_interval;
  std::vector<double> epsilon;
  std::vector<std::size_t> num_buckets;
  std::vector<std::size_t> epochs_per_stage;
};

struct GridResult {
  StrategyConfig config;
  std::size_t best_epoch = 0;
  double val_macro_f1 = 0.0;
  double val_micro_f1 = 0.0;
};

/// Trains every grid point; results are sorted by validation micro-F1, best first.
std::vector<GridResult> run_grid(const Corpus& corpus, const StrategyConfig& base,
                                 const GridSpec& grid, const CurriculumInputs& inputs = {});

}  // namespace culr
