#include "culr/crf.hpp"

#include <cmath>
#include <limits>

#include "culr/error.hpp"

namespace culr {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

double log_sum_exp(const double* x, Index n, Index stride = 1) {
  double hi = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < n; ++k) hi = std::max(hi, x[k * stride]);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (Index k = 0; k < n; ++k) s += std::exp(x[k * stride] - hi);
  return hi + std::log(s);
}

struct Lattice {
  MatrixXd alpha;  // m x L, includes emission at i
  MatrixXd beta;   // m x L, excludes emission at i
  double log_z = 0.0;
};

void check_shapes(const MatrixXd& emissions, const MatrixXd& transitions) {
  const Index L = emissions.cols();
  if (emissions.rows() < 1 || L < 1) throw DataError("CRF needs at least one position and one label");
  if (transitions.rows() != L + 1 || transitions.cols() != L + 1) {
    throw DataError("CRF transitions must be (L+1) x (L+1)");
  }
}

Lattice run_lattice(const MatrixXd& E, const MatrixXd& T) {
  check_shapes(E, T);
  const Index m = E.rows();
  const Index L = E.cols();
  const Index S = L;
  Lattice lat;
  lat.alpha.resize(m, L);
  lat.beta.resize(m, L);
  std::vector<double> buf(static_cast<std::size_t>(L));

  for (Index y = 0; y < L; ++y) lat.alpha(0, y) = T(S, y) + E(0, y);
  for (Index i = 1; i < m; ++i) {
    for (Index y = 0; y < L; ++y) {
      for (Index p = 0; p < L; ++p) buf[static_cast<std::size_t>(p)] = lat.alpha(i - 1, p) + T(p, y);
      lat.alpha(i, y) = E(i, y) + log_sum_exp(buf.data(), L);
    }
  }
  for (Index y = 0; y < L; ++y) lat.beta(m - 1, y) = T(y, S);
  for (Index i = m - 2; i >= 0; --i) {
    for (Index y = 0; y < L; ++y) {
      for (Index n = 0; n < L; ++n) {
        buf[static_cast<std::size_t>(n)] = T(y, n) + E(i + 1, n) + lat.beta(i + 1, n);
      }
      lat.beta(i, y) = log_sum_exp(buf.data(), L);
    }
  }
  for (Index y = 0; y < L; ++y) buf[static_cast<std::size_t>(y)] = lat.alpha(m - 1, y) + lat.beta(m - 1, y);
  lat.log_z = log_sum_exp(buf.data(), L);
  if (!std::isfinite(lat.log_z)) throw NumericalError("CRF log partition is not finite");
  return lat;
}

CrfMarginals marginals_from(const Lattice& lat, const MatrixXd& E, const MatrixXd& T) {
  const Index m = E.rows();
  const Index L = E.cols();
  CrfMarginals out;
  out.log_partition = lat.log_z;
  out.node = ((lat.alpha + lat.beta).array() - lat.log_z).exp().matrix();
  out.edge.reserve(static_cast<std::size_t>(m > 0 ? m - 1 : 0));
  for (Index i = 0; i + 1 < m; ++i) {
    MatrixXd e(L, L);
    for (Index a = 0; a < L; ++a) {
      for (Index b = 0; b < L; ++b) {
        e(a, b) = std::exp(lat.alpha(i, a) + T(a, b) + E(i + 1, b) + lat.beta(i + 1, b) - lat.log_z);
      }
    }
    out.edge.push_back(std::move(e));
  }
  return out;
}

// Gradient of log Z: expected emission and transition indicators.
void add_expected_counts(const CrfMarginals& mg, double scale, MatrixXd& dE, MatrixXd& dT) {
  const Index m = mg.node.rows();
  const Index L = mg.node.cols();
  const Index S = L;
  dE += scale * mg.node;
  for (Index y = 0; y < L; ++y) {
    dT(S, y) += scale * mg.node(0, y);
    dT(y, S) += scale * mg.node(m - 1, y);
  }
  for (const auto& e : mg.edge) dT.topLeftCorner(L, L) += scale * e;
}

}  // namespace

CrfMarginals crf_forward_backward(const MatrixXd& emissions, const MatrixXd& transitions) {
  const Lattice lat = run_lattice(emissions, transitions);
  return marginals_from(lat, emissions, transitions);
}

std::vector<RoleId> crf_viterbi(const MatrixXd& E, const MatrixXd& T) {
  check_shapes(E, T);
  const Index m = E.rows();
  const Index L = E.cols();
  const Index S = L;
  MatrixXd delta(m, L);
  Eigen::MatrixXi back(m, L);
  for (Index y = 0; y < L; ++y) delta(0, y) = T(S, y) + E(0, y);
  for (Index i = 1; i < m; ++i) {
    for (Index y = 0; y < L; ++y) {
      Index best = 0;
      double best_score = delta(i - 1, 0) + T(0, y);
      for (Index p = 1; p < L; ++p) {
        const double s = delta(i - 1, p) + T(p, y);
        if (s > best_score) {
          best_score = s;
          best = p;
        }
      }
      delta(i, y) = E(i, y) + best_score;
      back(i, y) = static_cast<int>(best);
    }
  }
  Index last = 0;
  double best_final = delta(m - 1, 0) + T(0, S);
  for (Index y = 1; y < L; ++y) {
    const double s = delta(m - 1, y) + T(y, S);
    if (s > best_final) {
      best_final = s;
      last = y;
    }
  }
  std::vector<RoleId> path(static_cast<std::size_t>(m));
  path[static_cast<std::size_t>(m - 1)] = static_cast<RoleId>(last);
  for (Index i = m - 1; i > 0; --i) {
    last = back(i, last);
    path[static_cast<std::size_t>(i - 1)] = static_cast<RoleId>(last);
  }
  return path;
}

double crf_path_score(const MatrixXd& E, const MatrixXd& T, const std::vector<RoleId>& path) {
  check_shapes(E, T);
  const Index m = E.rows();
  const Index S = E.cols();
  if (static_cast<Index>(path.size()) != m) throw DataError("path length does not match emissions");
  double s = T(S, path[0]) + T(path.back(), S);
  for (Index i = 0; i < m; ++i) {
    s += E(i, path[static_cast<std::size_t>(i)]);
    if (i + 1 < m) s += T(path[static_cast<std::size_t>(i)], path[static_cast<std::size_t>(i + 1)]);
  }
  return s;
}

ScoreGradient crf_nll(const MatrixXd& E, const MatrixXd& T, const std::vector<RoleId>& gold) {
  const Lattice lat = run_lattice(E, T);
  const CrfMarginals mg = marginals_from(lat, E, T);
  const Index m = E.rows();
  const Index S = E.cols();
  const double inv_m = 1.0 / static_cast<double>(m);

  ScoreGradient g;
  g.loss = (lat.log_z - crf_path_score(E, T, gold)) * inv_m;
  g.d_emissions = MatrixXd::Zero(E.rows(), E.cols());
  g.d_transitions = MatrixXd::Zero(T.rows(), T.cols());
  add_expected_counts(mg, inv_m, g.d_emissions, g.d_transitions);
  for (Index i = 0; i < m; ++i) {
    const auto y = static_cast<Index>(gold[static_cast<std::size_t>(i)]);
    g.d_emissions(i, y) -= inv_m;
    if (i + 1 < m) g.d_transitions(y, static_cast<Index>(gold[static_cast<std::size_t>(i + 1)])) -= inv_m;
  }
  g.d_transitions(S, static_cast<Index>(gold.front())) -= inv_m;
  g.d_transitions(static_cast<Index>(gold.back()), S) -= inv_m;
  return g;
}

ScoreGradient crf_marginal_cross_entropy(const MatrixXd& E, const MatrixXd& T, const MatrixXd& Q) {
  const Lattice lat = run_lattice(E, T);
  const CrfMarginals mg = marginals_from(lat, E, T);
  const Index m = E.rows();
  const Index L = E.cols();
  const Index S = L;
  if (Q.rows() != m || Q.cols() != L) throw DataError("targets must be m x L");
  const double inv_m = 1.0 / static_cast<double>(m);

  ScoreGradient g;
  g.d_emissions = MatrixXd::Zero(m, L);
  g.d_transitions = MatrixXd::Zero(L + 1, L + 1);

  // log marginal(i, y) = alpha(i, y) + beta(i, y) - log Z. With c = -Q / m the
  // loss is sum c*alpha + sum c*beta + log Z, because every target row sums to 1.
  double loss = 0.0;
  for (Index i = 0; i < m; ++i) {
    for (Index y = 0; y < L; ++y) {
      if (Q(i, y) != 0.0) loss -= Q(i, y) * (lat.alpha(i, y) + lat.beta(i, y) - lat.log_z);
    }
  }
  g.loss = loss * inv_m;
  const MatrixXd c = -inv_m * Q;

  add_expected_counts(mg, 1.0, g.d_emissions, g.d_transitions);

  // Adjoint of alpha, backwards in i. alpha(i+1, n) = E(i+1, n) + LSE_y(alpha(i, y) + T(y, n)).
  MatrixXd abar(m, L);
  for (Index i = m - 1; i >= 0; --i) {
    for (Index y = 0; y < L; ++y) abar(i, y) = c(i, y);
    if (i + 1 < m) {
      for (Index n = 0; n < L; ++n) {
        const double pre = lat.alpha(i + 1, n) - E(i + 1, n);
        const double up = abar(i + 1, n);
        for (Index y = 0; y < L; ++y) {
          const double w = up * std::exp(lat.alpha(i, y) + T(y, n) - pre);
          abar(i, y) += w;
          g.d_transitions(y, n) += w;
        }
      }
    }
    for (Index y = 0; y < L; ++y) g.d_emissions(i, y) += abar(i, y);
  }
  for (Index y = 0; y < L; ++y) g.d_transitions(S, y) += abar(0, y);

  // Adjoint of beta, forwards in i. beta(i, y) = LSE_n(T(y, n) + E(i+1, n) + beta(i+1, n)).
  MatrixXd bbar(m, L);
  for (Index i = 0; i < m; ++i) {
    for (Index y = 0; y < L; ++y) bbar(i, y) = c(i, y);
    if (i > 0) {
      for (Index p = 0; p < L; ++p) {
        const double up = bbar(i - 1, p);
        const double base = lat.beta(i - 1, p);
        for (Index y = 0; y < L; ++y) {
          const double w = up * std::exp(T(p, y) + E(i, y) + lat.beta(i, y) - base);
          bbar(i, y) += w;
          g.d_transitions(p, y) += w;
          g.d_emissions(i, y) += w;
        }
      }
    }
  }
  for (Index y = 0; y < L; ++y) g.d_transitions(y, S) += bbar(m - 1, y);
  return g;
}

ScoreGradient softmax_cross_entropy(const MatrixXd& E, const MatrixXd& T, const MatrixXd& Q) {
  const Index m = E.rows();
  const Index L = E.cols();
  if (Q.rows() != m || Q.cols() != L) throw DataError("targets must be m x L");
  const double inv_m = 1.0 / static_cast<double>(m);
  ScoreGradient g;
  g.d_emissions.resize(m, L);
  g.d_transitions = MatrixXd::Zero(T.rows(), T.cols());
  double loss = 0.0;
  std::vector<double> row(static_cast<std::size_t>(L));
  for (Index i = 0; i < m; ++i) {
    for (Index y = 0; y < L; ++y) row[static_cast<std::size_t>(y)] = E(i, y);
    const double lse = log_sum_exp(row.data(), L);
    for (Index y = 0; y < L; ++y) {
      const double log_p = E(i, y) - lse;
      if (Q(i, y) != 0.0) loss -= Q(i, y) * log_p;
      g.d_emissions(i, y) = (std::exp(log_p) - Q(i, y)) * inv_m;
    }
  }
  g.loss = loss * inv_m;
  return g;
}

}  // namespace culr
