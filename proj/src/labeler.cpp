#include "culr/labeler.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "culr/error.hpp"

namespace culr {

using Eigen::Index;
using Eigen::MatrixXd;
using nlohmann::json;

std::string_view to_string(HeadKind head) { return head == HeadKind::crf ? "crf" : "softmax"; }

HeadKind parse_head_kind(std::string_view text) {
  if (text == "crf") return HeadKind::crf;
  if (text == "softmax") return HeadKind::softmax;
  throw DataError("unknown head: " + std::string(text));
}

LabelerParams LabelerParams::zeros(std::size_t num_roles, std::size_t feature_dim, HeadKind head) {
  const auto L = static_cast<Index>(num_roles);
  LabelerParams p;
  p.emission = MatrixXd::Zero(L, static_cast<Index>(feature_dim));
  p.transition = MatrixXd::Zero(L + 1, L + 1);
  p.head = head;
  return p;
}

LabelerGradient LabelerGradient::zeros_like(const LabelerParams& params) {
  return {MatrixXd::Zero(params.emission.rows(), params.emission.cols()),
          MatrixXd::Zero(params.transition.rows(), params.transition.cols())};
}

void LabelerGradient::set_zero() {
  emission.setZero();
  transition.setZero();
}

MatrixXd emission_scores(const EncodedDocument& features, const LabelerParams& params) {
  const Index L = params.emission.rows();
  const Index F = params.emission.cols();
  MatrixXd scores = MatrixXd::Zero(static_cast<Index>(features.size()), L);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    for (std::size_t k = 0; k < f.nnz(); ++k) {
      const auto col = static_cast<Index>(f.index[k]);
      if (col >= F) throw DataError("feature index exceeds emission weight width");
      scores.row(static_cast<Index>(i)) += f.value[k] * params.emission.col(col).transpose();
    }
  }
  return scores;
}

MatrixXd one_hot_targets(const Document& doc, std::size_t num_roles) {
  MatrixXd t = MatrixXd::Zero(static_cast<Index>(doc.size()), static_cast<Index>(num_roles));
  for (std::size_t i = 0; i < doc.size(); ++i) t(static_cast<Index>(i), doc.labels[i]) = 1.0;
  return t;
}

MatrixXd soft_targets(const Document& doc, const TargetMatrix& targets) {
  MatrixXd t(static_cast<Index>(doc.size()), targets.v.cols());
  for (std::size_t i = 0; i < doc.size(); ++i) t.row(static_cast<Index>(i)) = targets.v.row(doc.labels[i]);
  return t;
}

namespace {

void validate_targets(const MatrixXd& targets) {
  for (Index i = 0; i < targets.rows(); ++i) {
    const double s = targets.row(i).sum();
    if (!(std::abs(s - 1.0) <= 1e-6) || (targets.row(i).array() < 0.0).any()) {
      throw std::invalid_argument("target row " + std::to_string(i) + " is not a probability distribution");
    }
  }
}

// Gold path when every row is exactly one-hot.
bool one_hot_path(const MatrixXd& targets, std::vector<RoleId>& path) {
  path.assign(static_cast<std::size_t>(targets.rows()), 0);
  for (Index i = 0; i < targets.rows(); ++i) {
    Index hot = -1;
    for (Index y = 0; y < targets.cols(); ++y) {
      const double q = targets(i, y);
      if (q == 1.0 && hot < 0) {
        hot = y;
      } else if (q != 0.0) {
        return false;
      }
    }
    if (hot < 0) return false;
    path[static_cast<std::size_t>(i)] = static_cast<RoleId>(hot);
  }
  return true;
}

}  // namespace

ScoreGradient sequence_loss(const MatrixXd& emissions, const MatrixXd& transitions,
                            const MatrixXd& targets, HeadKind head) {
  if (targets.rows() != emissions.rows() || targets.cols() != emissions.cols()) {
    throw std::invalid_argument("targets must match the emission shape");
  }
  validate_targets(targets);
  if (head == HeadKind::softmax) return softmax_cross_entropy(emissions, transitions, targets);
  std::vector<RoleId> gold;
  if (one_hot_path(targets, gold)) return crf_nll(emissions, transitions, gold);
  return crf_marginal_cross_entropy(emissions, transitions, targets);
}

double accumulate_loss_and_gradient(const EncodedDocument& features, const MatrixXd& targets,
                                    const LabelerParams& params, LabelerGradient& grad, double scale) {
  const MatrixXd scores = emission_scores(features, params);
  const ScoreGradient g = sequence_loss(scores, params.transition, targets, params.head);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    const auto dE = g.d_emissions.row(static_cast<Index>(i)).transpose();
    for (std::size_t k = 0; k < f.nnz(); ++k) {
      grad.emission.col(static_cast<Index>(f.index[k])) += (scale * f.value[k]) * dE;
    }
  }
  if (params.head == HeadKind::crf) grad.transition += scale * g.d_transitions;
  return g.loss;
}

LossAndGradient loss_and_gradient(const EncodedDocument& features, const MatrixXd& targets,
                                  const LabelerParams& params) {
  LossAndGradient out{0.0, LabelerGradient::zeros_like(params)};
  out.loss = accumulate_loss_and_gradient(features, targets, params, out.gradient);
  return out;
}

std::vector<RoleId> predict(const EncodedDocument& features, const LabelerParams& params) {
  const MatrixXd scores = emission_scores(features, params);
  if (params.head == HeadKind::crf) return crf_viterbi(scores, params.transition);
  std::vector<RoleId> out(features.size());
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index y = 1; y < scores.cols(); ++y) {
      if (scores(i, y) > scores(i, best)) best = y;
    }
    out[static_cast<std::size_t>(i)] = static_cast<RoleId>(best);
  }
  return out;
}

// ---------------------------------------------------------------------------

void AdamState::reset(std::size_t size) {
  m.assign(size, 0.0);
  v.assign(size, 0.0);
  step = 0;
}

void adam_step(std::span<double> params, std::span<const double> grad, const AdamConfig& config,
               AdamState& state) {
  if (grad.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw std::invalid_argument("adam: parameter, gradient and state sizes differ");
  }
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      std::ostringstream msg;
      msg << "non-finite gradient at coordinate " << k << " (value " << grad[k] << ", step "
          << state.step + 1 << ")";
      throw NumericalError(msg.str());
    }
  }
  ++state.step;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grad[k];
    double& m = state.m[k];
    double& v = state.v[k];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    if (m == 0.0) continue;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[k] -= config.lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

LabelerOptimizer::LabelerOptimizer(const LabelerParams& params, AdamConfig cfg) : config(cfg) {
  reset(params);
}

void LabelerOptimizer::reset(const LabelerParams& params) {
  emission.reset(static_cast<std::size_t>(params.emission.size()));
  transition.reset(static_cast<std::size_t>(params.transition.size()));
}

void LabelerOptimizer::step(LabelerParams& params, const LabelerGradient& grad) {
  adam_step({params.emission.data(), static_cast<std::size_t>(params.emission.size())},
            {grad.emission.data(), static_cast<std::size_t>(grad.emission.size())}, config, emission);
  adam_step({params.transition.data(), static_cast<std::size_t>(params.transition.size())},
            {grad.transition.data(), static_cast<std::size_t>(grad.transition.size())}, config,
            transition);
}

// ---------------------------------------------------------------------------

namespace {

json sparse_json(const MatrixXd& m) {
  json entries = json::array();
  for (Index k = 0; k < m.size(); ++k) {
    if (m.data()[k] != 0.0) entries.push_back({k, m.data()[k]});
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"nonzero", std::move(entries)}};
}

MatrixXd sparse_from_json(const json& j) {
  MatrixXd m = MatrixXd::Zero(j.at("rows").get<Index>(), j.at("cols").get<Index>());
  for (const auto& e : j.at("nonzero")) {
    const auto k = e.at(0).get<Index>();
    if (k < 0 || k >= m.size()) throw DataError("checkpoint weight index out of range");
    m.data()[k] = e.at(1).get<double>();
  }
  return m;
}

}  // namespace

json to_json(const Model& model) {
  return {{"format", "culr-model"},
          {"version", kCheckpointVersion},
          {"roles", model.inventory.names()},
          {"inventory_hash", model.inventory.fingerprint()},
          {"head", to_string(model.params.head)},
          {"features", model.encoder.to_json()},
          {"emission", sparse_json(model.params.emission)},
          {"transition", sparse_json(model.params.transition)}};
}

Model model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "culr-model") throw DataError("not a model checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
    }
    Model model;
    model.inventory = RoleInventory(j.at("roles").get<std::vector<std::string>>());
    if (model.inventory.fingerprint() != j.at("inventory_hash").get<std::string>()) {
      throw DataError("checkpoint inventory hash mismatch");
    }
    model.encoder = FeatureEncoder::from_json(j.at("features"));
    model.params.head = parse_head_kind(j.at("head").get<std::string>());
    model.params.emission = sparse_from_json(j.at("emission"));
    model.params.transition = sparse_from_json(j.at("transition"));
    const auto L = static_cast<Index>(model.inventory.size());
    if (model.params.emission.rows() != L ||
        model.params.emission.cols() != static_cast<Index>(model.encoder.feature_dim()) ||
        model.params.transition.rows() != L + 1 || model.params.transition.cols() != L + 1) {
      throw DataError("checkpoint parameter shapes do not match its feature config");
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << to_json(model).dump() << '\n';
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace culr
