#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lsjm/kernels.hpp"
#include "lsjm/network.hpp"

namespace lsjm {

using kernels::Exec;

// Fixed hyperparameters: alpha ~ N(xi, psi2), z_i ~ N(0, sigma2 * I_D).
struct PriorConfig {
  double xi = 0.0;
  double psi2 = 2.0;
  double sigma2 = 1.0;
  int dim = 2;

  void validate() const;  // throws InvalidConfig
};

// Variational parameters of one view: q(alpha) = N(xi_tilde, psi2_tilde) and
// q(z_i) = N(positions.row(i), cov) with one covariance shared by all nodes.
struct ViewVariationalState {
  double xi_tilde = 0.0;
  double psi2_tilde = 2.0;
  Eigen::MatrixXd positions;  // N x D
  Eigen::MatrixXd cov;        // D x D, SPD

  int n() const { return static_cast<int>(positions.rows()); }
  int dim() const { return static_cast<int>(positions.cols()); }
  void validate() const;  // finiteness, psi2_tilde > 0, cov SPD
};

struct FitConfig {
  double tol = 1e-2;
  int min_iters = 10;
  int max_iters = 1000;
  int restarts = 10;
  std::uint64_t seed = 1;
  int align_iters = 10;  // joint fits only
  // Under-relaxation of the position state: each view's new rows are
  // (1 - relaxation) * previous + relaxation * proposal, and for joint fits
  // the fused means are damped the same way. The plain fixed-point iteration
  // (relaxation = 1) limit-cycles on networks of realistic size; the one-step
  // operations stay pure.
  double relaxation = 0.3;
  Exec exec = Exec::Parallel;

  // Throws InvalidConfig on nonsense; clamps min_iters down to max_iters so a
  // zero-iteration run is expressible.
  FitConfig normalized() const;
};

struct RestartRecord {
  int iterations = 0;
  bool converged = false;
  double initial_objective = 0.0;
  double final_objective = 0.0;
};

struct FitReport {
  std::vector<double> objective_trace;  // monitored objective, one entry per iteration
  int iterations = 0;
  bool converged = false;
  int best_restart = 0;
  std::vector<RestartRecord> restarts;
  std::vector<std::string> warnings;
};

// E_q[exp(alpha - |z_i - z_j|^2)] in closed form:
//   exp(xi_tilde + psi2_tilde/2) det(I + 4 cov)^{-1/2}
//     * exp(-(zi - zj)' (I + 4 cov)^{-1} (zi - zj)).
double mgf_term(const Eigen::VectorXd& zi, const Eigen::VectorXd& zj,
                const Eigen::MatrixXd& cov, double xi_tilde, double psi2_tilde);

// Jensen-bounded expected log-likelihood of one view at its own parameters.
// Used for monitoring, restart selection and stopping.
double surrogate_objective(const AdjacencyView& view, const ViewVariationalState& state,
                           Exec exec = Exec::Parallel);

// Closed-form Gaussian KL pieces, exposed for reporting and tests.
double kl_alpha_term(const ViewVariationalState& state, const PriorConfig& prior);
double kl_position_term(const ViewVariationalState& state, const PriorConfig& prior);

// KL[q || p] up to the Jensen approximation of the expected log-likelihood:
// kl_alpha_term + kl_position_term - surrogate_objective.
double kl_objective(const AdjacencyView& view, const ViewVariationalState& state,
                    const PriorConfig& prior, Exec exec = Exec::Parallel);

// One covariance update: N/2 * [(N/(2 sigma2) + 2 L) I + J]^{-1}, symmetrized,
// with J expanded at the anchor parameters and L the observed ordered link count.
// If the bracket loses positive definiteness its eigenvalues are clamped to the
// prior part N/(2 sigma2), capping the covariance at sigma2; counted in *repairs.
Eigen::MatrixXd estep_cov(const AdjacencyView& view, const kernels::SweepParams& anchor,
                          const PriorConfig& prior, Exec exec = Exec::Parallel,
                          int* repairs = nullptr);

// One Jacobi sweep of position updates: every row is solved against the anchor
// rows of the previous iteration, so the result is order-independent and safe
// to compute in parallel. `cov_for_curvature` is the covariance the gradient
// and Hessian are built with (the freshly updated one inside an EM iteration).
// A node whose bracket loses positive definiteness is retried once with the
// PSD part of its pair Hessian on both sides of the solve; counted in *repairs.
Eigen::MatrixXd estep_positions(const AdjacencyView& view,
                                const Eigen::MatrixXd& anchor_positions,
                                const Eigen::MatrixXd& cov_for_curvature, double xi_tilde,
                                double psi2_tilde, const PriorConfig& prior,
                                Exec exec = Exec::Parallel, int* repairs = nullptr);

struct EstepResult {
  Eigen::MatrixXd positions;
  Eigen::MatrixXd cov;
  int repairs = 0;  // ridge fallbacks applied; callers surface them as warnings
};

// Full E-step anchored at `state`: covariance first, then positions with the
// new covariance, neighbors at their previous values.
EstepResult estep_update(const AdjacencyView& view, const ViewVariationalState& state,
                         const PriorConfig& prior, Exec exec = Exec::Parallel);

struct MstepResult {
  double xi_tilde = 0.0;
  double psi2_tilde = 0.0;
};

// M-step anchored at the post-E-step positions/cov carried by `state`:
// xi_tilde from f', f'' at the old xi_tilde; then psi2_tilde from f' evaluated
// with the new xi_tilde. psi2_tilde > 0 always (f' >= 0).
MstepResult mstep_update(const AdjacencyView& view, const ViewVariationalState& state,
                         const PriorConfig& prior, Exec exec = Exec::Parallel);
MstepResult mstep_anchored(const AdjacencyView& view, const Eigen::MatrixXd& positions,
                           const Eigen::MatrixXd& cov, double xi_tilde_old,
                           double psi2_tilde_old, const PriorConfig& prior,
                           Exec exec = Exec::Parallel);

struct LsmFit {
  ViewVariationalState state;
  FitReport report;
};

// Variational EM for a single view: seeded random starts, E/M sweeps, stop when
// the surrogate changes less than tol after at least min_iters iterations, keep
// the restart with the highest final surrogate.
LsmFit fit_lsm(const AdjacencyView& view, const PriorConfig& prior, const FitConfig& config);

}  // namespace lsjm
