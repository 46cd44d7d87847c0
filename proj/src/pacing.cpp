#include "culr/pacing.hpp"

#include <algorithm>
#include <stdexcept>

#include "culr/error.hpp"

namespace culr {

BabyStepSchedule build_schedule(BucketAssignment assignment, std::size_t epochs_per_stage) {
  if (epochs_per_stage < 1) throw DataError("epochs per stage must be at least 1");
  if (assignment.buckets.empty()) throw DataError("cannot schedule an empty bucket assignment");

  BabyStepSchedule schedule;
  schedule.epochs_per_stage = epochs_per_stage;
  std::vector<std::string> cumulative;
  for (const auto& bucket : assignment.buckets) {
    cumulative.insert(cumulative.end(), bucket.begin(), bucket.end());
    std::vector<std::string> stage = cumulative;
    std::sort(stage.begin(), stage.end());
    if (std::adjacent_find(stage.begin(), stage.end()) != stage.end()) {
      throw DataError("bucket assignment lists a document twice");
    }
    schedule.stages.push_back(std::move(stage));
  }
  schedule.assignment = std::move(assignment);
  return schedule;
}

const std::vector<std::string>& stage_documents(const BabyStepSchedule& schedule,
                                                std::size_t stage_index) {
  if (stage_index >= schedule.stages.size()) {
    throw std::out_of_range("stage " + std::to_string(stage_index) + " out of range (" +
                            std::to_string(schedule.stages.size()) + " stages)");
  }
  return schedule.stages[stage_index];
}

nlohmann::json to_json(const BabyStepSchedule& schedule) {
  using nlohmann::json;
  json buckets = json::array();
  for (const auto& b : schedule.assignment.buckets) buckets.push_back(b);
  json stages = json::array();
  for (std::size_t k = 0; k < schedule.stages.size(); ++k) {
    stages.push_back({{"stage", k},
                      {"first_epoch", k * schedule.epochs_per_stage},
                      {"epochs", schedule.epochs_per_stage},
                      {"size", schedule.stages[k].size()},
                      {"documents", schedule.stages[k]}});
  }
  return {{"num_buckets", schedule.assignment.num_buckets()},
          {"epochs_per_stage", schedule.epochs_per_stage},
          {"scheduled_epochs", schedule.scheduled_epochs()},
          {"buckets", std::move(buckets)},
          {"stages", std::move(stages)}};
}

}  // namespace culr
