#include "lsjm/lsjm.hpp"

#include <cmath>
#include <numbers>

#include "lsjm/errors.hpp"
#include "lsjm/rng.hpp"

namespace lsjm {

namespace {

std::vector<const AdjacencyView*> view_pointers(const MultiplexNetwork& net) {
  std::vector<const AdjacencyView*> out;
  out.reserve(net.views.size());
  for (const auto& v : net.views) out.push_back(&v);
  return out;
}

void check_priors(const std::vector<const AdjacencyView*>& views,
                  const std::vector<PriorConfig>& priors) {
  if (views.empty()) throw InvalidConfig("need at least one view");
  if (priors.size() != views.size())
    throw InvalidConfig("need one prior per view");
  for (const auto& p : priors) p.validate();
  for (std::size_t k = 1; k < priors.size(); ++k) {
    if (priors[k].sigma2 != priors[0].sigma2 || priors[k].dim != priors[0].dim)
      throw InvalidConfig("priors must share sigma2 and dim");
  }
  for (std::size_t k = 1; k < views.size(); ++k) {
    if (views[k]->n() != views[0]->n())
      throw DimensionMismatch("views disagree on node count");
  }
}

}  // namespace

FusedPosterior fuse(const std::vector<ViewVariationalState>& states, double sigma2,
                    FuseInfo* info) {
  if (states.empty()) throw InvalidConfig("fuse needs at least one state");
  const int k = static_cast<int>(states.size());
  if (k == 1) return FusedPosterior{states[0].positions, states[0].cov};

  const int n = states[0].n();
  const int d = states[0].dim();
  for (const auto& s : states)
    if (s.n() != n || s.dim() != d) throw DimensionMismatch("states disagree on N or D");

  Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(n, d);  // sum_k Z_k cov_k^{-1}
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  for (const auto& s : states) {
    const Eigen::MatrixXd p_k = s.cov.llt().solve(eye);
    precision += p_k;
    weighted += s.positions * p_k;
  }
  precision -= (static_cast<double>(k - 1) / sigma2) * eye;
  precision = 0.5 * (precision + precision.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(precision);
  Eigen::VectorXd eigs = es.eigenvalues();
  int clamped = 0;
  for (int i = 0; i < d; ++i) {
    if (eigs(i) <= 1e-8) {
      eigs(i) = 1e-6;
      ++clamped;
    }
  }
  if (info) info->clamped += clamped;

  FusedPosterior out;
  out.cov = es.eigenvectors() * eigs.cwiseInverse().asDiagonal() *
            es.eigenvectors().transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.positions = weighted * out.cov;
  return out;
}

Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& reference,
                                    const Eigen::MatrixXd& target) {
  if (reference.rows() != target.rows() || reference.cols() != target.cols())
    throw DimensionMismatch("reference and target must have the same shape");
  const int d = static_cast<int>(reference.cols());
  const Eigen::MatrixXd cross = target.transpose() * reference;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0 || sv(sv.size() - 1) <= 1e-12 * sv(0))
    return Eigen::MatrixXd::Identity(d, d);  // rank-deficient cross-product
  return svd.matrixU() * svd.matrixV().transpose();
}

double expected_log_prior(const FusedPosterior& fused, double sigma2) {
  const double n = static_cast<double>(fused.positions.rows());
  const double d = static_cast<double>(fused.positions.cols());
  return -0.5 * n * d * std::log(2.0 * std::numbers::pi * sigma2) -
         (fused.positions.squaredNorm() + n * fused.cov.trace()) / (2.0 * sigma2);
}

double joint_objective(const std::vector<const AdjacencyView*>& views, const LsjmFit& fit,
                       Exec exec) {
  double obj = 0.0;
  for (std::size_t k = 0; k < views.size(); ++k) {
    obj += kernels::surrogate(*views[k],
                              {fit.fused.positions, fit.fused.cov,
                               fit.view_states[k].xi_tilde, fit.view_states[k].psi2_tilde},
                              exec);
  }
  const int k = static_cast<int>(views.size());
  if (k > 1)
    obj -= static_cast<double>(k - 1) * expected_log_prior(fit.fused, fit.priors[0].sigma2);
  return obj;
}

double joint_objective(const MultiplexNetwork& net, const LsjmFit& fit, Exec exec) {
  return joint_objective(view_pointers(net), fit, exec);
}

void lsjm_estep(const std::vector<const AdjacencyView*>& views, LsjmFit& fit,
                bool align_views, Exec exec, StepDiagnostics* diag, double relaxation) {
  const int k = static_cast<int>(views.size());
  StepDiagnostics local;
  StepDiagnostics* d = diag ? diag : &local;

  // Covariance updates, all expanded at the previous fused state.
  for (int v = 0; v < k; ++v) {
    fit.view_states[v].cov = estep_cov(
        *views[v],
        {fit.fused.positions, fit.fused.cov, fit.view_states[v].xi_tilde,
         fit.view_states[v].psi2_tilde},
        fit.priors[v], exec, &d->repairs);
  }

  // Fused covariance feeds the curvature of every position sweep.
  FuseInfo finfo;
  FusedPosterior fused_new = fuse(fit.view_states, fit.priors[0].sigma2, &finfo);
  d->fuse_clamps += finfo.clamped;

  for (int v = 0; v < k; ++v) {
    Eigen::MatrixXd proposal = estep_positions(
        *views[v], fit.fused.positions, fused_new.cov, fit.view_states[v].xi_tilde,
        fit.view_states[v].psi2_tilde, fit.priors[v], exec, &d->repairs);
    if (relaxation < 1.0)
      proposal =
          ((1.0 - relaxation) * fit.view_states[v].positions + relaxation * proposal)
              .eval();
    fit.view_states[v].positions = std::move(proposal);
  }

  // The model is identifiable only up to orthogonal maps, so matching views
  // onto view 1 early speeds up convergence without changing any objective.
  if (align_views) {
    for (int v = 1; v < k; ++v) {
      const Eigen::MatrixXd rot = procrustes_rotation(fit.view_states[0].positions,
                                                      fit.view_states[v].positions);
      fit.view_states[v].positions = (fit.view_states[v].positions * rot).eval();
      Eigen::MatrixXd c = rot.transpose() * fit.view_states[v].cov * rot;
      fit.view_states[v].cov = 0.5 * (c + c.transpose()).eval();
    }
  }

  FuseInfo pinfo;
  FusedPosterior merged = fuse(fit.view_states, fit.priors[0].sigma2, &pinfo);
  d->fuse_clamps += pinfo.clamped;
  // Damping the fused means as well brakes the K > 1 feedback loop through
  // the anchor; one view reduces to the single-view iteration untouched.
  if (relaxation < 1.0 && k > 1)
    merged.positions =
        ((1.0 - relaxation) * fit.fused.positions + relaxation * merged.positions).eval();
  fit.fused = std::move(merged);
}

void lsjm_estep(const MultiplexNetwork& net, LsjmFit& fit, bool align_views, Exec exec,
                StepDiagnostics* diag, double relaxation) {
  lsjm_estep(view_pointers(net), fit, align_views, exec, diag, relaxation);
}

void lsjm_mstep(const std::vector<const AdjacencyView*>& views, LsjmFit& fit, Exec exec) {
  for (std::size_t v = 0; v < views.size(); ++v) {
    const MstepResult m = mstep_anchored(
        *views[v], fit.fused.positions, fit.fused.cov, fit.view_states[v].xi_tilde,
        fit.view_states[v].psi2_tilde, fit.priors[v], exec);
    fit.view_states[v].xi_tilde = m.xi_tilde;
    fit.view_states[v].psi2_tilde = m.psi2_tilde;
  }
}

void lsjm_mstep(const MultiplexNetwork& net, LsjmFit& fit, Exec exec) {
  lsjm_mstep(view_pointers(net), fit, exec);
}

namespace {

LsjmFit init_fit(const std::vector<const AdjacencyView*>& views,
                 const std::vector<PriorConfig>& priors, std::uint64_t seed) {
  const int n = views[0]->n();
  const int d = priors[0].dim;
  LsjmFit fit;
  fit.priors = priors;
  fit.fused.positions.resize(n, d);
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < d; ++c) fit.fused.positions(i, c) = rng.normal();
  fit.fused.cov = Eigen::MatrixXd::Identity(d, d);
  fit.view_states.resize(views.size());
  for (auto& s : fit.view_states) {
    s.xi_tilde = 0.0;
    s.psi2_tilde = 2.0;
    s.positions = fit.fused.positions;
    s.cov = Eigen::MatrixXd::Identity(d, d);
  }
  return fit;
}

}  // namespace

LsjmFit fit_lsjm_views(const std::vector<const AdjacencyView*>& views,
                       const std::vector<PriorConfig>& priors, const FitConfig& config) {
  check_priors(views, priors);
  const FitConfig cfg = config.normalized();

  LsjmFit best;
  double best_final = 0.0;
  std::vector<RestartRecord> records;
  std::vector<std::string> warnings;
  records.reserve(static_cast<std::size_t>(cfg.restarts));

  for (int r = 0; r < cfg.restarts; ++r) {
    LsjmFit fit = init_fit(views, priors, substream_seed(cfg.seed, "restart", r));
    StepDiagnostics diag;
    RestartRecord rec;
    rec.initial_objective = joint_objective(views, fit, cfg.exec);

    double prev = rec.initial_objective;
    for (int it = 1; it <= cfg.max_iters; ++it) {
      lsjm_estep(views, fit, it <= cfg.align_iters, cfg.exec, &diag, cfg.relaxation);
      lsjm_mstep(views, fit, cfg.exec);
      const double obj = joint_objective(views, fit, cfg.exec);
      fit.report.objective_trace.push_back(obj);
      rec.iterations = it;
      if (it >= cfg.min_iters && std::abs(obj - prev) < cfg.tol) {
        rec.converged = true;
        break;
      }
      prev = obj;
    }
    rec.final_objective = fit.report.objective_trace.empty()
                              ? rec.initial_objective
                              : fit.report.objective_trace.back();
    // The loop anchors on damped fused means; report the exact fusion of the
    // final view states.
    fit.fused = fuse(fit.view_states, priors[0].sigma2);
    if (diag.repairs > 0 || diag.fuse_clamps > 0) {
      warnings.push_back("restart " + std::to_string(r) + ": " +
                         std::to_string(diag.repairs) + " curvature repair(s), " +
                         std::to_string(diag.fuse_clamps) + " fused precision clamp(s)");
    }
    records.push_back(rec);

    if (r == 0 || rec.final_objective > best_final) {
      best_final = rec.final_objective;
      fit.report.iterations = rec.iterations;
      fit.report.converged = rec.converged;
      fit.report.best_restart = r;
      best = std::move(fit);
    }
  }

  best.report.restarts = std::move(records);
  best.report.warnings = std::move(warnings);
  return best;
}

LsjmFit fit_lsjm(const MultiplexNetwork& net, const std::vector<PriorConfig>& priors,
                 const FitConfig& config) {
  return fit_lsjm_views(view_pointers(net), priors, config);
}

LsmFit fit_lsm(const AdjacencyView& view, const PriorConfig& prior, const FitConfig& config) {
  LsjmFit joint = fit_lsjm_views({&view}, {prior}, config);
  return LsmFit{std::move(joint.view_states[0]), std::move(joint.report)};
}

}  // namespace lsjm
