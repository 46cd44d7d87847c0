#include "culr/label_curriculum.hpp"

#include <cmath>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "culr/error.hpp"

namespace culr {

std::string_view to_string(SimilaritySource source) {
  return source == SimilaritySource::confusion ? "confusion" : "embedding";
}

SimilaritySource parse_similarity_source(std::string_view text) {
  if (text == "confusion") return SimilaritySource::confusion;
  if (text == "embedding") return SimilaritySource::embedding;
  throw DataError("unknown similarity source: " + std::string(text));
}

namespace {

void fill_uniform_off_diagonal(Eigen::MatrixXd& m) {
  m.setOnes();
  m.diagonal().setZero();
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SimilarityMatrix similarity_from_confusion(const Eigen::MatrixXd& confusion) {
  if (confusion.rows() != confusion.cols()) throw DataError("confusion matrix must be square");
  if ((confusion.array() < 0.0).any() || !confusion.allFinite()) {
    throw DataError("confusion counts must be finite and non-negative");
  }
  SimilarityMatrix out;
  out.source = SimilaritySource::confusion;
  out.sim = (confusion + confusion.transpose()) / 2.0;
  out.sim.diagonal().setZero();
  if (confusion.rows() > 1 && out.sim.sum() == 0.0) {
    fill_uniform_off_diagonal(out.sim);
    out.uniform_fallback = true;
  }
  return out;
}

SimilarityMatrix similarity_from_embeddings(const std::vector<std::vector<double>>& vectors) {
  const auto L = static_cast<Eigen::Index>(vectors.size());
  if (L == 0) throw DataError("no label embeddings");
  const std::size_t dim = vectors.front().size();
  std::vector<double> norms;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) throw DataError("label embedding dimension mismatch");
    double n2 = 0.0;
    for (double x : vectors[i]) n2 += x * x;
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
      throw DataError("label embedding " + std::to_string(i) + " has zero norm");
    }
    norms.push_back(std::sqrt(n2));
  }
  SimilarityMatrix out;
  out.source = SimilaritySource::embedding;
  out.sim = Eigen::MatrixXd::Zero(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = i + 1; j < L; ++j) {
      const auto& a = vectors[static_cast<std::size_t>(i)];
      const auto& b = vectors[static_cast<std::size_t>(j)];
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += a[k] * b[k];
      const double cosine = dot / (norms[static_cast<std::size_t>(i)] * norms[static_cast<std::size_t>(j)]);
      out.sim(i, j) = out.sim(j, i) = std::max(0.0, cosine);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<double>>> read_label_embeddings(std::istream& in) {
  std::vector<std::pair<std::string, std::vector<double>>> rows;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("label embeddings line " + std::to_string(line_no) + ": expected role<TAB>values");
    }
    std::string name = line.substr(0, tab);
    if (!seen.insert(name).second) {
      throw DataError("label embeddings line " + std::to_string(line_no) + ": duplicate role " + name);
    }
    std::istringstream values(line.substr(tab + 1));
    std::vector<double> vec;
    std::string tok;
    while (values >> tok) {
      try {
        std::size_t used = 0;
        vec.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw DataError("label embeddings line " + std::to_string(line_no) + ": bad number " + tok);
      }
    }
    rows.emplace_back(std::move(name), std::move(vec));
  }
  return rows;
}

std::vector<std::vector<double>> load_label_embeddings(std::istream& in,
                                                       const RoleInventory& inventory) {
  std::vector<std::vector<double>> out(inventory.size());
  std::vector<bool> found(inventory.size(), false);
  for (auto& [name, vec] : read_label_embeddings(in)) {
    auto id = inventory.find(name);
    if (!id) throw DataError("label embeddings: role not in inventory: " + name);
    out[*id] = std::move(vec);
    found[*id] = true;
  }
  for (std::size_t r = 0; r < found.size(); ++r) {
    if (!found[r]) throw DataError("label embeddings: missing role " + inventory.name(static_cast<RoleId>(r)));
  }
  return out;
}

// ---------------------------------------------------------------------------

double TargetMatrix::off_diagonal_mass(Eigen::Index row) const {
  return v.row(row).sum() - v(row, row);
}

double TargetMatrix::max_off_diagonal_mass() const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      if (k != i) s += v(i, k);
    }
    best = std::max(best, s);
  }
  return best;
}

double TargetMatrix::max_off_diagonal() const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      if (k != i) best = std::max(best, v(i, k));
    }
  }
  return best;
}

bool TargetMatrix::near_identity(double tolerance) const { return max_off_diagonal() < tolerance; }

TargetMatrix init_target_matrix(const SimilarityMatrix& sim, double eta, double epsilon) {
  if (!(eta >= 0.0 && eta < 1.0)) throw DataError("eta must lie in [0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DataError("epsilon must lie in (0, 1)");
  const Eigen::Index L = sim.sim.rows();
  if (L == 0 || sim.sim.cols() != L) throw DataError("similarity matrix must be square and non-empty");

  TargetMatrix t;
  t.epsilon = epsilon;
  t.v = Eigen::MatrixXd::Zero(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index k = 0; k < L; ++k) {
      if (k != i) row_sum += sim.sim(i, k);
    }
    const bool uniform = row_sum <= 0.0;
    if (uniform && L > 1) t.uniform_rows.push_back(static_cast<RoleId>(i));
    for (Eigen::Index k = 0; k < L; ++k) {
      if (k == i) continue;
      const double share = uniform ? 1.0 / static_cast<double>(L - 1) : sim.sim(i, k) / row_sum;
      t.v(i, k) = L > 1 ? eta * share : 0.0;
    }
    t.v(i, i) = L > 1 ? 1.0 - eta : 1.0;
  }
  return t;
}

TargetMatrix identity_targets(std::size_t num_roles, double epsilon) {
  TargetMatrix t;
  const auto L = static_cast<Eigen::Index>(num_roles);
  t.v = Eigen::MatrixXd::Identity(L, L);
  t.epsilon = epsilon;
  return t;
}

TargetMatrix update_target_matrix(const TargetMatrix& targets) {
  TargetMatrix next = targets;
  const double eps = targets.epsilon;
  const Eigen::Index L = targets.v.rows();
  for (Eigen::Index i = 0; i < L; ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < L; ++k) {
      if (k != i) s += targets.v(i, k);
    }
    const double denom = 1.0 + eps * s;
    for (Eigen::Index j = 0; j < L; ++j) {
      next.v(i, j) = (j == i) ? 1.0 / denom : eps * targets.v(i, j) / denom;
    }
  }
  ++next.step;
  return next;
}

std::vector<double> soft_targets_for(RoleId label, const TargetMatrix& targets) {
  if (label >= targets.size()) throw DataError("label id out of range");
  const auto row = targets.v.row(label);
  return std::vector<double>(row.begin(), row.end());
}

int annealing_steps(const TargetMatrix& initial, double tolerance, int max_steps) {
  TargetMatrix t = initial;
  int steps = 0;
  while (!t.near_identity(tolerance)) {
    if (max_steps > 0 && steps >= max_steps) break;
    t = update_target_matrix(t);
    ++steps;
  }
  return steps;
}

nlohmann::json to_json(const SimilarityMatrix& sim, const RoleInventory& inventory) {
  return {{"roles", inventory.names()},
          {"source", to_string(sim.source)},
          {"uniform_fallback", sim.uniform_fallback},
          {"similarity", matrix_json(sim.sim)}};
}

nlohmann::json to_json(const TargetMatrix& targets, const RoleInventory& inventory) {
  nlohmann::json uniform = nlohmann::json::array();
  for (RoleId r : targets.uniform_rows) uniform.push_back(inventory.name(r));
  return {{"roles", inventory.names()},
          {"step", targets.step},
          {"epsilon", targets.epsilon},
          {"max_off_diagonal_mass", targets.max_off_diagonal_mass()},
          {"uniform_rows", std::move(uniform)},
          {"targets", matrix_json(targets.v)}};
}

}  // namespace culr
