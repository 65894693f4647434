#include "lsjm/variational.hpp"

#include <cmath>

#include "lsjm/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lsjm {

namespace {

bool is_spd(const Eigen::MatrixXd& m, double floor = 0.0) {
  if (m.rows() != m.cols()) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > floor;
}

// Positive-semidefinite part: eigenvalues clipped at zero.
Eigen::MatrixXd psd_part(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
         es.eigenvectors().transpose();
}

// Closed forms for the symmetric 2x2 work inside the position sweep.
struct Sym2 {
  double a, b, c;  // [a b; b c]

  double min_eig() const {
    const double half_tr = 0.5 * (a + c);
    return half_tr - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  }
  void solve(const double* r, double* x) const {
    const double det = a * c - b * b;
    x[0] = (c * r[0] - b * r[1]) / det;
    x[1] = (a * r[1] - b * r[0]) / det;
  }
  Sym2 psd() const {
    const double half_tr = 0.5 * (a + c);
    const double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    const double lo = half_tr - disc, hi = half_tr + disc;
    if (lo >= 0.0) return *this;
    if (hi <= 0.0) return Sym2{0.0, 0.0, 0.0};
    // Rank-one hi * v v' with v the eigenvector for hi.
    double vx, vy;
    if (std::fabs(b) > 1e-300) {
      vx = b;
      vy = hi - a;
    } else if (a >= c) {
      vx = 1.0;
      vy = 0.0;
    } else {
      vx = 0.0;
      vy = 1.0;
    }
    const double nrm2 = vx * vx + vy * vy;
    return Sym2{hi * vx * vx / nrm2, hi * vx * vy / nrm2, hi * vy * vy / nrm2};
  }
};

// If the symmetric bracket is not safely positive definite, clamps its
// eigenvalues to at least `floor` so the inverse stays bounded. Returns true
// when the repair fired.
bool clamp_if_broken(Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() > 1e-8) return false;
  m = es.eigenvectors() * es.eigenvalues().cwiseMax(floor).asDiagonal() *
      es.eigenvectors().transpose();
  return true;
}

}  // namespace

void PriorConfig::validate() const {
  if (!(psi2 > 0.0)) throw InvalidConfig("psi2 must be > 0");
  if (!(sigma2 > 0.0)) throw InvalidConfig("sigma2 must be > 0");
  if (dim < 1) throw InvalidConfig("dim must be >= 1");
  if (!std::isfinite(xi)) throw InvalidConfig("xi must be finite");
}

void ViewVariationalState::validate() const {
  if (!(psi2_tilde > 0.0)) throw InvalidConfig("psi2_tilde must be > 0");
  if (!std::isfinite(xi_tilde)) throw InvalidConfig("xi_tilde must be finite");
  if (!positions.allFinite()) throw InvalidConfig("positions must be finite");
  if (cov.rows() != cov.cols() || cov.rows() != positions.cols())
    throw DimensionMismatch("cov dimension does not match positions");
  if (!is_spd(cov)) throw NonPositiveDefinite("cov must be symmetric positive definite");
}

FitConfig FitConfig::normalized() const {
  FitConfig c = *this;
  if (!(c.tol > 0.0)) throw InvalidConfig("tol must be > 0");
  if (c.max_iters < 0) throw InvalidConfig("max_iters must be >= 0");
  if (c.restarts < 1) throw InvalidConfig("restarts must be >= 1");
  if (!(c.relaxation > 0.0) || c.relaxation > 1.0)
    throw InvalidConfig("relaxation must be in (0, 1]");
  if (c.min_iters < 0) c.min_iters = 0;
  if (c.min_iters > c.max_iters) c.min_iters = c.max_iters;
  if (c.align_iters < 0) c.align_iters = 0;
  return c;
}

double mgf_term(const Eigen::VectorXd& zi, const Eigen::VectorXd& zj,
                const Eigen::MatrixXd& cov, double xi_tilde, double psi2_tilde) {
  const auto ctx = kernels::PairContext::make(cov, xi_tilde, psi2_tilde);
  return std::exp(ctx.log_odds(zi - zj));
}

double surrogate_objective(const AdjacencyView& view, const ViewVariationalState& state,
                           Exec exec) {
  return kernels::surrogate(
      view, {state.positions, state.cov, state.xi_tilde, state.psi2_tilde}, exec);
}

double kl_alpha_term(const ViewVariationalState& state, const PriorConfig& prior) {
  const double ratio = state.psi2_tilde / prior.psi2;
  const double dmean = state.xi_tilde - prior.xi;
  return 0.5 * (ratio - std::log(ratio) + dmean * dmean / prior.psi2 - 1.0);
}

double kl_position_term(const ViewVariationalState& state, const PriorConfig& prior) {
  const double n = static_cast<double>(state.n());
  const double d = static_cast<double>(state.dim());
  const double logdet = Eigen::LLT<Eigen::MatrixXd>(state.cov)
                            .matrixLLT()
                            .diagonal()
                            .array()
                            .log()
                            .sum() *
                        2.0;
  return 0.5 * (n * state.cov.trace() / prior.sigma2 +
                state.positions.squaredNorm() / prior.sigma2 - n * d +
                n * d * std::log(prior.sigma2) - n * logdet);
}

double kl_objective(const AdjacencyView& view, const ViewVariationalState& state,
                    const PriorConfig& prior, Exec exec) {
  return kl_alpha_term(state, prior) + kl_position_term(state, prior) -
         surrogate_objective(view, state, exec);
}

Eigen::MatrixXd estep_cov(const AdjacencyView& view, const kernels::SweepParams& anchor,
                          const PriorConfig& prior, Exec exec, int* repairs) {
  const double n = static_cast<double>(view.n());
  const int d = static_cast<int>(anchor.cov.rows());
  Eigen::MatrixXd jac = kernels::sigma_jacobian(view, anchor, exec);
  jac = 0.5 * (jac + jac.transpose()).eval();  // kill roundoff asymmetry
  const double scale = n / (2.0 * prior.sigma2) + 2.0 * static_cast<double>(view.link_count());
  Eigen::MatrixXd bracket = scale * Eigen::MatrixXd::Identity(d, d) + jac;
  // A strongly negative jacobian can break the bracket far from the optimum.
  // Flooring its eigenvalues at the prior part caps the covariance at sigma2.
  if (clamp_if_broken(bracket, n / (2.0 * prior.sigma2)) && repairs) ++*repairs;
  Eigen::MatrixXd cov = 0.5 * n * bracket.llt().solve(Eigen::MatrixXd::Identity(d, d));
  return 0.5 * (cov + cov.transpose()).eval();
}

Eigen::MatrixXd estep_positions(const AdjacencyView& view,
                                const Eigen::MatrixXd& anchor_positions,
                                const Eigen::MatrixXd& cov_for_curvature, double xi_tilde,
                                double psi2_tilde, const PriorConfig& prior, Exec exec,
                                int* repairs) {
  const int n = view.n();
  const int d = static_cast<int>(anchor_positions.cols());
  const auto ctx = kernels::PairContext::make(cov_for_curvature, xi_tilde, psi2_tilde);
  Eigen::MatrixXd updated(n, d);
  std::vector<int> repaired(static_cast<std::size_t>(n), 0);

  // The pair penalty is concave around coincident points, so its Hessian can
  // overwhelm the prior-plus-degree curvature far from the optimum. A broken
  // bracket is retried once with the PSD part of the Hessian on both sides of
  // the solve; that keeps every fixed point of the exact stationarity
  // condition and leaves the update untouched whenever the bracket is PD.
  auto update_row = [&](int i) {
    Eigen::VectorXd grad(d);
    Eigen::MatrixXd hess(d, d);
    kernels::node_grad_hess(view, ctx, anchor_positions, i, grad, hess);

    double deg = 0.0;
    Eigen::VectorXd neighbor_pull = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double w = 0.0;
      if (view.observed(i, j)) w += view.y(i, j);
      if (view.observed(j, i)) w += view.y(j, i);
      if (w > 0.0) {
        deg += w;
        neighbor_pull += w * anchor_positions.row(j).transpose();
      }
    }

    const double prior_curv = 1.0 / (2.0 * prior.sigma2) + deg;
    if (d == 2) {
      Sym2 h{hess(0, 0), hess(0, 1), hess(1, 1)};
      Sym2 bracket{h.a + prior_curv, h.b, h.c + prior_curv};
      if (bracket.min_eig() <= 1e-8) {
        repaired[static_cast<std::size_t>(i)] = 1;
        h = h.psd();
        bracket = Sym2{h.a + prior_curv, h.b, h.c + prior_curv};
      }
      const double ax = anchor_positions(i, 0), ay = anchor_positions(i, 1);
      const double rhs[2] = {neighbor_pull(0) - grad(0) + h.a * ax + h.b * ay,
                             neighbor_pull(1) - grad(1) + h.b * ax + h.c * ay};
      double out[2];
      bracket.solve(rhs, out);
      updated(i, 0) = out[0];
      updated(i, 1) = out[1];
      return;
    }

    Eigen::MatrixXd bracket = prior_curv * Eigen::MatrixXd::Identity(d, d) + hess;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bracket);
    if (es.eigenvalues().minCoeff() <= 1e-8) {
      repaired[static_cast<std::size_t>(i)] = 1;
      hess = psd_part(hess);
      bracket = prior_curv * Eigen::MatrixXd::Identity(d, d) + hess;
    }
    const Eigen::VectorXd rhs =
        neighbor_pull - grad + hess * anchor_positions.row(i).transpose();
    updated.row(i) = bracket.llt().solve(rhs).transpose();
  };

#ifdef _OPENMP
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) update_row(i);
  } else {
    for (int i = 0; i < n; ++i) update_row(i);
  }
#else
  for (int i = 0; i < n; ++i) update_row(i);
#endif

  if (repairs)
    for (int i = 0; i < n; ++i) *repairs += repaired[static_cast<std::size_t>(i)];
  return updated;
}

EstepResult estep_update(const AdjacencyView& view, const ViewVariationalState& state,
                         const PriorConfig& prior, Exec exec) {
  EstepResult out;
  out.cov = estep_cov(view, {state.positions, state.cov, state.xi_tilde, state.psi2_tilde},
                      prior, exec, &out.repairs);
  out.positions = estep_positions(view, state.positions, out.cov, state.xi_tilde,
                                  state.psi2_tilde, prior, exec, &out.repairs);
  return out;
}

MstepResult mstep_anchored(const AdjacencyView& view, const Eigen::MatrixXd& positions,
                           const Eigen::MatrixXd& cov, double xi_tilde_old,
                           double psi2_tilde_old, const PriorConfig& prior, Exec exec) {
  MstepResult out;
  const auto xi_d =
      kernels::xi_derivatives(view, {positions, cov, xi_tilde_old, psi2_tilde_old}, exec);
  const double links = static_cast<double>(view.link_count());
  out.xi_tilde = (prior.xi + prior.psi2 * (links - xi_d.first + xi_tilde_old * xi_d.second)) /
                 (1.0 + prior.psi2 * xi_d.second);
  const double psi_d = kernels::psi2_derivative(
      view, {positions, cov, out.xi_tilde, psi2_tilde_old}, exec);
  out.psi2_tilde = 1.0 / (1.0 / prior.psi2 + 2.0 * psi_d);
  return out;
}

MstepResult mstep_update(const AdjacencyView& view, const ViewVariationalState& state,
                         const PriorConfig& prior, Exec exec) {
  return mstep_anchored(view, state.positions, state.cov, state.xi_tilde, state.psi2_tilde,
                        prior, exec);
}

}  // namespace lsjm
