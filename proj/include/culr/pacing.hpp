#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "culr/difficulty.hpp"
#include "json.hpp"

namespace culr {

/// Baby-step schedule: stage k trains on the union of buckets 0..k.
struct BabyStepSchedule {
  BucketAssignment assignment;
  std::size_t epochs_per_stage = 1;
  /// Cumulative unions, each sorted by document id.
  std::vector<std::vector<std::string>> stages;

  std::size_t num_stages() const { return stages.size(); }
  std::size_t scheduled_epochs() const { return stages.size() * epochs_per_stage; }
};

BabyStepSchedule build_schedule(BucketAssignment assignment, std::size_t epochs_per_stage);

/// Documents available at `stage_index`, in id order. Throws std::out_of_range.
const std::vector<std::string>& stage_documents(const BabyStepSchedule& schedule,
                                                std::size_t stage_index);

nlohmann::json to_json(const BabyStepSchedule& schedule);

}  // namespace culr
