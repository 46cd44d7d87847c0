#include "culr/metrics.hpp"

#include "culr/error.hpp"

namespace culr {

using Eigen::Index;
using nlohmann::json;

void tally_confusion(Eigen::MatrixXd& confusion, const std::vector<RoleId>& gold,
                     const std::vector<RoleId>& predicted) {
  if (gold.size() != predicted.size()) throw DataError("gold and predicted lengths differ");
  for (std::size_t i = 0; i < gold.size(); ++i) confusion(gold[i], predicted[i]) += 1.0;
}

Metrics compute_metrics(const Eigen::MatrixXd& confusion) {
  const Index L = confusion.rows();
  Metrics m;
  m.confusion = confusion;
  const double total = confusion.sum();
  if (total <= 0.0) throw DataError("cannot score an empty prediction set");
  m.num_sentences = static_cast<std::size_t>(total);

  const double correct = confusion.diagonal().sum();
  m.accuracy = correct / total;
  // Every sentence is one false positive for its prediction and one false
  // negative for its gold class, so pooled precision = recall = accuracy.
  m.micro_f1 = m.accuracy;

  double f1_sum = 0.0;
  std::size_t counted = 0;
  for (Index c = 0; c < L; ++c) {
    ClassScores s;
    const double tp = confusion(c, c);
    const double gold = confusion.row(c).sum();
    const double pred = confusion.col(c).sum();
    s.support = static_cast<std::size_t>(gold);
    s.predicted = static_cast<std::size_t>(pred);
    s.precision = pred > 0 ? tp / pred : 0.0;
    s.recall = gold > 0 ? tp / gold : 0.0;
    s.f1 = tp > 0 ? 2.0 * tp / (gold + pred) : 0.0;
    if (gold > 0 || pred > 0) {
      f1_sum += s.f1;
      ++counted;
    }
    m.per_class.push_back(s);
  }
  m.macro_f1 = counted > 0 ? f1_sum / static_cast<double>(counted) : 0.0;
  return m;
}

json confusion_json(const Eigen::MatrixXd& confusion, const RoleInventory& inventory) {
  json rows = json::array();
  for (Index r = 0; r < confusion.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < confusion.cols(); ++c) row.push_back(static_cast<long long>(confusion(r, c)));
    rows.push_back(std::move(row));
  }
  return {{"roles", inventory.names()}, {"confusion", std::move(rows)}};
}

Eigen::MatrixXd confusion_from_json(const json& j, const RoleInventory& inventory) {
  try {
    const auto roles = j.at("roles").get<std::vector<std::string>>();
    const auto& rows = j.at("confusion");
    if (rows.size() != roles.size()) throw DataError("confusion matrix does not match its role list");
    const auto L = static_cast<Index>(inventory.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(L, L);
    std::vector<RoleId> map;
    for (const auto& r : roles) map.push_back(inventory.id(r));
    for (std::size_t a = 0; a < roles.size(); ++a) {
      if (rows[a].size() != roles.size()) throw DataError("confusion matrix must be square");
      for (std::size_t b = 0; b < roles.size(); ++b) out(map[a], map[b]) = rows[a][b].get<double>();
    }
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed confusion matrix: ") + e.what());
  }
}

json to_json(const Metrics& m, const RoleInventory& inventory) {
  json classes = json::array();
  for (std::size_t c = 0; c < m.per_class.size(); ++c) {
    const auto& s = m.per_class[c];
    classes.push_back({{"role", inventory.name(static_cast<RoleId>(c))},
                       {"precision", s.precision},
                       {"recall", s.recall},
                       {"f1", s.f1},
                       {"support", s.support},
                       {"predicted", s.predicted}});
  }
  return {{"macro_f1", m.macro_f1},
          {"micro_f1", m.micro_f1},
          {"accuracy", m.accuracy},
          {"sentences", m.num_sentences},
          {"per_class", std::move(classes)},
          {"confusion", confusion_json(m.confusion, inventory).at("confusion")}};
}

}  // namespace culr
