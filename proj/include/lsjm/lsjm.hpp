#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lsjm/network.hpp"
#include "lsjm/variational.hpp"

namespace lsjm {

// Gaussian posterior of the shared latent positions given every view:
// proportional to prod_k q_k(z_i) / p(z_i)^{K-1}.
struct FusedPosterior {
  Eigen::MatrixXd positions;  // N x D, rows are fused means
  Eigen::MatrixXd cov;        // D x D, SPD
};

struct FuseInfo {
  int clamped = 0;  // eigenvalues of the fused precision clamped to stay PD
};

// cov = [sum_k cov_k^{-1} - (K-1)/sigma2 I]^{-1},
// positions_i = cov * sum_k cov_k^{-1} positions_ik.
// K = 1 is the exact identity on the single state. A fused precision with an
// eigenvalue <= 1e-8 has it clamped to 1e-6 in the eigenbasis (counted in info).
FusedPosterior fuse(const std::vector<ViewVariationalState>& states, double sigma2,
                    FuseInfo* info = nullptr);

// Orthogonal R (reflections allowed) minimizing ||reference - target * R||_F.
// No translation or centering is applied. A rank-deficient cross-product
// returns the identity.
Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& reference,
                                    const Eigen::MatrixXd& target);

struct LsjmFit {
  FusedPosterior fused;
  std::vector<ViewVariationalState> view_states;
  std::vector<PriorConfig> priors;
  FitReport report;

  int view_count() const { return static_cast<int>(view_states.size()); }
};

// E_q[log p(Z)] under the fused posterior with prior z_i ~ N(0, sigma2 I).
double expected_log_prior(const FusedPosterior& fused, double sigma2);

// Monitored objective of the joint fit: per-view surrogates evaluated at the
// fused positions/covariance with each view's intercept parameters, minus
// (K-1) E_q[log p(Z)]. Reduces to the single-view surrogate at K = 1.
double joint_objective(const std::vector<const AdjacencyView*>& views, const LsjmFit& fit,
                       Exec exec = Exec::Parallel);
double joint_objective(const MultiplexNetwork& net, const LsjmFit& fit,
                       Exec exec = Exec::Parallel);

struct StepDiagnostics {
  int repairs = 0;
  int fuse_clamps = 0;
};

// One joint E-step: per-view covariance updates expanded at the fused state,
// covariance fusion, per-view position sweeps against the fused positions with
// the new fused covariance, optional alignment of views k > 1 onto view 1, then
// position fusion. Alignment rotates each view's positions and covariance
// together, which leaves every surrogate value unchanged. `relaxation` mixes
// each position proposal with its anchor (1 = the pure update); fits pass
// FitConfig::relaxation here.
void lsjm_estep(const std::vector<const AdjacencyView*>& views, LsjmFit& fit,
                bool align_views = false, Exec exec = Exec::Parallel,
                StepDiagnostics* diag = nullptr, double relaxation = 1.0);
void lsjm_estep(const MultiplexNetwork& net, LsjmFit& fit, bool align_views = false,
                Exec exec = Exec::Parallel, StepDiagnostics* diag = nullptr,
                double relaxation = 1.0);

// Per-view intercept updates with the pair sums evaluated at the fused state.
void lsjm_mstep(const std::vector<const AdjacencyView*>& views, LsjmFit& fit,
                Exec exec = Exec::Parallel);
void lsjm_mstep(const MultiplexNetwork& net, LsjmFit& fit, Exec exec = Exec::Parallel);

// Joint variational EM over K views sharing one latent space; K = 1 follows the
// single-view trajectory exactly. Priors must share sigma2 and dim.
LsjmFit fit_lsjm(const MultiplexNetwork& net, const std::vector<PriorConfig>& priors,
                 const FitConfig& config);
LsjmFit fit_lsjm_views(const std::vector<const AdjacencyView*>& views,
                       const std::vector<PriorConfig>& priors, const FitConfig& config);

}  // namespace lsjm
