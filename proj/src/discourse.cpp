#include "culr/discourse.hpp"

#include <algorithm>
#include <istream>
#include <numeric>

#include "culr/error.hpp"

namespace culr {

TransitionMatrix estimate_transition_matrix(const std::vector<const Document*>& docs,
                                            std::size_t num_roles, double alpha) {
  if (docs.empty()) throw DataError("transition matrix needs at least one document");
  if (num_roles == 0) throw DataError("transition matrix needs a non-empty inventory");
  if (!(alpha >= 0.0)) throw DataError("smoothing alpha must be non-negative");

  const auto L = static_cast<Eigen::Index>(num_roles);
  TransitionMatrix tm;
  tm.alpha = alpha;
  tm.counts = Eigen::MatrixXd::Zero(L + 1, L);
  tm.role_counts = role_frequencies(docs, num_roles);
  for (const auto* doc : docs) {
    const auto& labels = doc->labels;
    if (labels.empty()) continue;
    tm.counts(0, labels.front()) += 1.0;
    for (std::size_t i = 0; i + 1 < labels.size(); ++i) {
      tm.counts(labels[i] + 1, labels[i + 1]) += 1.0;
    }
  }
  renormalize(tm);
  return tm;
}

void renormalize(TransitionMatrix& tm) {
  const auto rows = tm.counts.rows();
  const auto L = tm.counts.cols();
  tm.probs.resize(rows, L);
  tm.undefined_rows.clear();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double total = tm.counts.row(r).sum() + tm.alpha * static_cast<double>(L);
    if (total <= 0.0) {
      tm.probs.row(r).setConstant(1.0 / static_cast<double>(L));
      tm.undefined_rows.push_back(static_cast<std::size_t>(r));
      continue;
    }
    for (Eigen::Index c = 0; c < L; ++c) tm.probs(r, c) = (tm.counts(r, c) + tm.alpha) / total;
  }
}

nlohmann::json to_json(const TransitionMatrix& tm, const RoleInventory& inventory) {
  using nlohmann::json;
  auto matrix = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json undefined = json::array();
  for (auto r : tm.undefined_rows) {
    undefined.push_back(r == 0 ? std::string("START") : inventory.name(static_cast<RoleId>(r - 1)));
  }
  json sources = json::array({"START"});
  for (const auto& n : inventory.names()) sources.push_back(n);
  return {{"roles", inventory.names()},
          {"sources", std::move(sources)},
          {"alpha", tm.alpha},
          {"counts", matrix(tm.counts)},
          {"probabilities", matrix(tm.probs)},
          {"role_counts", tm.role_counts},
          {"undefined_rows", std::move(undefined)}};
}

std::vector<RoleId> CanonicalOrder::sequence() const {
  std::vector<RoleId> seq(ranks.size());
  for (std::size_t r = 0; r < ranks.size(); ++r) seq.at(static_cast<std::size_t>(ranks[r])) = static_cast<RoleId>(r);
  return seq;
}

CanonicalOrder derive_canonical_order(const TransitionMatrix& tm) {
  const std::size_t L = tm.num_roles();
  std::vector<bool> visited(L, false);
  CanonicalOrder order;
  order.source = OrderSource::data_derived;
  order.ranks.assign(L, -1);

  // Best unvisited column of `row` under (probability, frequency, -id).
  auto pick = [&](Eigen::Index row) {
    std::size_t best = L;
    for (std::size_t c = 0; c < L; ++c) {
      if (visited[c]) continue;
      if (best == L) {
        best = c;
        continue;
      }
      const double p = tm.probs(row, static_cast<Eigen::Index>(c));
      const double bp = tm.probs(row, static_cast<Eigen::Index>(best));
      if (p > bp || (p == bp && tm.role_counts[c] > tm.role_counts[best])) best = c;
    }
    return best;
  };

  Eigen::Index row = 0;
  for (std::size_t rank = 0; rank < L; ++rank) {
    const std::size_t next = pick(row);
    visited[next] = true;
    order.ranks[next] = static_cast<int>(rank);
    row = static_cast<Eigen::Index>(next) + 1;
  }
  return order;
}

CanonicalOrder load_expert_order(std::istream& in, const RoleInventory& inventory,
                                 const std::vector<std::size_t>& role_counts) {
  const std::size_t L = inventory.size();
  CanonicalOrder order;
  order.source = OrderSource::expert;
  order.ranks.assign(L, -1);

  int next_rank = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string name = line.substr(b, e - b + 1);
    auto id = inventory.find(name);
    if (!id) {
      throw DataError("expert order line " + std::to_string(line_no) + ": role not in inventory: " + name);
    }
    if (order.ranks[*id] >= 0) {
      throw DataError("expert order line " + std::to_string(line_no) + ": duplicate role " + name);
    }
    order.ranks[*id] = next_rank++;
  }

  std::vector<RoleId> missing;
  for (RoleId r = 0; r < L; ++r) {
    if (order.ranks[r] < 0) missing.push_back(r);
  }
  std::stable_sort(missing.begin(), missing.end(), [&](RoleId a, RoleId b) {
    const std::size_t fa = a < role_counts.size() ? role_counts[a] : 0;
    const std::size_t fb = b < role_counts.size() ? role_counts[b] : 0;
    return fa > fb;
  });
  for (RoleId r : missing) order.ranks[r] = next_rank++;
  return order;
}

}  // namespace culr
