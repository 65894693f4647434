#pragma once

#include <Eigen/Dense>

#include "lsjm/network.hpp"

namespace lsjm::kernels {

// Every dyad sum below is defined as: per-row partial sums in ascending j,
// combined in ascending i. The serial path follows that order literally and the
// OpenMP path only computes the row partials concurrently, so both produce
// bit-identical results for any thread count.
enum class Exec { Serial, Parallel };

// Applies the LSJM_THREADS cap (if set) to the OpenMP runtime. No-op without OpenMP.
void apply_thread_cap_from_env();

// Per-sweep quantities shared by all dyads: B = I + 4*cov, its inverse, and
// log_gain = xi + psi2/2 - log det(B)/2. The log-odds of a link between two
// posterior-mean positions is log_gain - diff' * B^-1 * diff.
struct PairContext {
  Eigen::MatrixXd b_inv;
  double log_gain = 0.0;
  int dim = 0;

  // Throws SingularMatrix when I + 4*cov has no Cholesky factor (corrupted state).
  static PairContext make(const Eigen::MatrixXd& cov, double xi_tilde, double psi2_tilde);

  double log_odds(const Eigen::VectorXd& diff) const {
    return log_gain - diff.dot(b_inv * diff);
  }
};

// Snapshot of the parameters a dyad sweep runs against. `positions` holds the
// expansion-point rows (a view's own means for the single-view model, the fused
// means for the joint model); `cov` is whichever covariance the caller's update
// schedule prescribes.
struct SweepParams {
  const Eigen::MatrixXd& positions;  // N x D
  const Eigen::MatrixXd& cov;        // D x D
  double xi_tilde = 0.0;
  double psi2_tilde = 2.0;
};

// Jensen-bounded expected log-likelihood over observed ordered dyads:
//   sum_{i != j} y_ij (xi - 2 tr(cov) - |z_i - z_j|^2) - log(1 + m_ij).
double surrogate(const AdjacencyView& view, const SweepParams& p, Exec exec = Exec::Parallel);

// Derivative of the pair penalty with respect to cov, D x D symmetric:
//   sum over observed ordered dyads of p_ij (4 u u' - 2 B^-1), u = B^-1 (z_i - z_j).
Eigen::MatrixXd sigma_jacobian(const AdjacencyView& view, const SweepParams& p,
                               Exec exec = Exec::Parallel);

// First/second derivative of the pair penalty in xi:
//   first = sum p_ij, second = sum p_ij (1 - p_ij).
struct XiDerivatives {
  double first = 0.0;
  double second = 0.0;
};
XiDerivatives xi_derivatives(const AdjacencyView& view, const SweepParams& p,
                             Exec exec = Exec::Parallel);

// First derivative of the pair penalty in psi2: 0.5 * sum p_ij.
double psi2_derivative(const AdjacencyView& view, const SweepParams& p,
                       Exec exec = Exec::Parallel);

// Gradient and Hessian, at positions.row(node), of
//   phi_i(z) = sum_j (w_ij / 2) log(1 + m(z, z_j)),
// where w_ij counts the observed ordered directions between i and j (0, 1 or 2).
// With everything observed this is the per-node pair penalty in closed form.
// Single-row work; callers build the PairContext once per sweep and
// parallelize across nodes.
void node_grad_hess(const AdjacencyView& view, const PairContext& ctx,
                    const Eigen::MatrixXd& positions, int node, Eigen::VectorXd& grad,
                    Eigen::MatrixXd& hess);
void node_grad_hess(const AdjacencyView& view, const SweepParams& p, int node,
                    Eigen::VectorXd& grad, Eigen::MatrixXd& hess);

// log(1 + e^x) without overflow.
double softplus(double x);
// 1 / (1 + e^-x).
double sigmoid(double x);

}  // namespace lsjm::kernels
