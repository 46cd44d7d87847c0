#pragma once

#include <Eigen/Dense>
#include <vector>

#include "culr/corpus.hpp"
#include "json.hpp"

namespace culr {

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // gold count
  std::size_t predicted = 0;  // predicted count
};

struct Metrics {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<ClassScores> per_class;
  /// (gold, predicted) counts.
  Eigen::MatrixXd confusion;
  std::size_t num_sentences = 0;
};

/// Single-label multiclass scores. Macro-F1 averages over classes that occur
/// in the gold labels or the predictions; micro-F1 pools every sentence.
Metrics compute_metrics(const Eigen::MatrixXd& confusion);

/// Adds one (gold, predicted) pair per sentence.
void tally_confusion(Eigen::MatrixXd& confusion, const std::vector<RoleId>& gold,
                     const std::vector<RoleId>& predicted);

nlohmann::json to_json(const Metrics& metrics, const RoleInventory& inventory);

/// `{"roles": [...], "confusion": [[...]]}` as written by the confusion command.
nlohmann::json confusion_json(const Eigen::MatrixXd& confusion, const RoleInventory& inventory);
/// Reads a confusion export, re-indexed onto `inventory`.
Eigen::MatrixXd confusion_from_json(const nlohmann::json& j, const RoleInventory& inventory);

}  // namespace culr
