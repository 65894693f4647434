// Acceptance suite: runs every shipping criterion end to end and prints one
// PASS/FAIL line per criterion. Dataset-value checks that need the original
// (non-redistributable) data activate when LSJM_GIRLS_DIR / LSJM_PROTEIN_DIR
// point at directories holding the converted edge lists; otherwise the
// bundled synthetic stand-ins (same sizes, link counts and densities) carry
// the structural and property checks and the value bands are reported as
// skipped.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "checks.hpp"
#include "lsjm/version.hpp"
#include "lsjm/io.hpp"
#include "lsjm/kernels.hpp"
#include "lsjm/lsjm.hpp"
#include "lsjm/prediction.hpp"
#include "lsjm/rng.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace lsjm;

namespace {

struct Reporter {
  std::vector<std::string> failures;
  void fail(const std::string& msg) { failures.push_back(msg); }
  void check(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
  }
  void band(double value, double target, double tol, const std::string& what) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s = %.4f (target %.3f +/- %.3f)", what.c_str(),
                  value, target, tol);
    std::printf("    %s\n", buf);
    if (std::fabs(value - target) > tol) fail(buf);
  }
  void note(const char* f, auto... args) {
    std::printf("    ");
    if constexpr (sizeof...(args) == 0)
      std::printf("%s", f);
    else
      std::printf(f, args...);
    std::printf("\n");
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FitConfig default_fit_config() {
  FitConfig cfg;  // tol 1e-2, min 10, restarts 10, the published protocol
  cfg.seed = 1;
  return cfg;
}

// ---------------------------------------------------------------------------
// Dataset bundles
// ---------------------------------------------------------------------------

struct DatasetBundle {
  std::string name;
  bool real = false;
  std::vector<std::string> paths;
  MultiplexNetwork net{NodeSet({"a", "b"}), {}};
  LsjmFit joint;
  std::vector<LsmFit> singles;
  CvResult cv_dyad_lsjm, cv_dyad_lsm, cv_node;
  double seconds = 0.0;
  bool loaded = false;
};

MultiplexNetwork load_net(const std::vector<std::string>& paths) {
  std::vector<ParsedView> parsed;
  for (const auto& p : paths)
    parsed.push_back(parse_edge_list(read_file(p), fs::path(p).stem().string()));
  std::vector<AdjacencyView> views;
  for (auto& pv : parsed) views.push_back(std::move(pv.view));
  return build_multiplex(std::move(parsed[0].nodes), std::move(views));
}

DatasetBundle make_bundle(const std::string& name, const char* env_dir,
                          const std::vector<std::string>& files) {
  DatasetBundle b;
  b.name = name;
  std::string dir = std::string(LSJM_SYNTH_DIR);
  if (const char* real = std::getenv(env_dir)) {
    dir = real;
    b.real = true;
  }
  for (const auto& f : files) b.paths.push_back(dir + "/" + f);

  const auto t0 = std::chrono::steady_clock::now();
  b.net = load_net(b.paths);
  const int k = b.net.view_count();
  const std::vector<PriorConfig> priors(static_cast<std::size_t>(k), PriorConfig{});
  const FitConfig cfg = default_fit_config();

  b.joint = fit_lsjm(b.net, priors, cfg);
  for (int v = 0; v < k; ++v)
    b.singles.push_back(
        fit_lsm(b.net.views[static_cast<std::size_t>(v)], priors[0], cfg));

  const CvPlan dyad_plan = make_cv_plan(b.net, CvMode::Dyads, 10, cfg.seed);
  b.cv_dyad_lsjm = run_cv(b.net, priors, cfg, dyad_plan, Estimator::Lsjm);
  b.cv_dyad_lsm = run_cv(b.net, priors, cfg, dyad_plan, Estimator::SingleLsmPerView);
  const CvPlan node_plan = make_cv_plan(b.net, CvMode::Nodes, 10, cfg.seed);
  b.cv_node = run_cv(b.net, priors, cfg, node_plan, Estimator::Lsjm);

  b.seconds = seconds_since(t0);
  b.loaded = true;
  return b;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

void criterion_derivatives(Reporter& r) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_below(4));  // N <= 6
    auto view = testutil::random_view(rng, n, trial % 2 == 0, 0.5,
                                      trial % 3 == 0 ? 0.25 : 0.0);
    ViewVariationalState state = testutil::random_state(rng, n, 2);
    state.xi_tilde = 2.0 * rng.uniform01() - 1.0;
    state.psi2_tilde = 0.3 + rng.uniform01();
    const auto err = testutil::finite_difference_errors(view, state);
    worst = std::max(worst, err.worst());
  }
  const double secs = seconds_since(t0);
  r.note("worst relative error %.3g over 20 instances, %.2f s", worst, secs);
  r.check(worst < 1e-5, "finite-difference relative error exceeded 1e-5");
  r.check(secs < 5.0, "derivative check exceeded 5 s");
}

void criterion_mgf(Reporter& r) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240602);
  double worst_sigma = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd zi = testutil::random_positions(rng, 1, 2).row(0);
    Eigen::VectorXd zj = testutil::random_positions(rng, 1, 2).row(0);
    const Eigen::MatrixXd cov = testutil::random_spd(rng, 2);
    const double xi = rng.uniform01() - 0.5;
    const double psi2 = 0.4 + 0.8 * rng.uniform01();
    const double exact = mgf_term(zi, zj, cov, xi, psi2);
    const auto mc = testutil::mc_mgf(zi, zj, cov, xi, psi2, 1000000,
                                     substream_seed(555, "mgf", trial));
    const double dev = std::fabs(exact - mc.mean) / mc.stderr_;
    worst_sigma = std::max(worst_sigma, dev);
  }
  const double secs = seconds_since(t0);
  r.note("worst deviation %.2f standard errors over 10 draws x 1e6 samples, %.1f s",
         worst_sigma, secs);
  r.check(worst_sigma < 3.0, "closed form deviates more than 3 standard errors");
  r.check(secs < 30.0, "Monte-Carlo check exceeded 30 s");
}

void criterion_fusion(Reporter& r) {
  Rng rng(20240603);
  double worst = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_below(2));
    std::vector<ViewVariationalState> states(static_cast<std::size_t>(k));
    for (auto& s : states) {
      s.positions = Eigen::MatrixXd::Zero(1, 1);
      s.positions(0, 0) = 1.5 * (rng.uniform01() - 0.5);
      s.cov = Eigen::MatrixXd::Constant(1, 1, 0.2 + 0.5 * rng.uniform01());
      s.psi2_tilde = 1.0;
    }
    const auto fused = fuse(states, 1.0);
    double w_sum = 0.0, wz_sum = 0.0, wzz_sum = 0.0;
    for (double z = -20.0; z <= 20.0; z += 1e-3) {
      double lw = 0.0;
      for (const auto& s : states) {
        const double d = z - s.positions(0, 0);
        lw += -0.5 * std::log(2.0 * std::numbers::pi * s.cov(0, 0)) -
              d * d / (2.0 * s.cov(0, 0));
      }
      lw -= (k - 1) * (-0.5 * std::log(2.0 * std::numbers::pi) - z * z / 2.0);
      const double w = std::exp(lw);
      w_sum += w;
      wz_sum += w * z;
      wzz_sum += w * z * z;
    }
    const double mean = wz_sum / w_sum;
    const double var = wzz_sum / w_sum - mean * mean;
    worst = std::max(worst, std::fabs(mean - fused.positions(0, 0)));
    worst = std::max(worst, std::fabs(var - fused.cov(0, 0)));
  }
  r.note("worst grid-moment deviation %.2e", worst);
  r.check(worst < 1e-4, "fused moments deviate from grid integration by >= 1e-4");

  std::vector<ViewVariationalState> one{testutil::random_state(rng, 8, 2)};
  const auto same = fuse(one, 1.0);
  const double dev =
      std::max((same.positions - one[0].positions).cwiseAbs().maxCoeff(),
               (same.cov - one[0].cov).cwiseAbs().maxCoeff());
  r.note("K=1 reduction deviation %.2e", dev);
  r.check(dev <= 1e-12, "K=1 fusion is not the identity");
}

void criterion_procrustes(Reporter& r) {
  Rng rng(20240604);
  const Eigen::MatrixXd ref = testutil::random_positions(rng, 25, 2);
  const double theta = 1.1;
  Eigen::MatrixXd rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const Eigen::MatrixXd target = ref * rot;
  const Eigen::MatrixXd rec = procrustes_rotation(ref, target);
  const double misfit = (target * rec - ref).norm();
  r.note("planted-rotation misfit %.2e", misfit);
  r.check(misfit < 1e-10, "planted rotation not recovered to 1e-10");

  bool beats_grid = true;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd a = testutil::random_positions(rng, 20, 2);
    const Eigen::MatrixXd b = testutil::random_positions(rng, 20, 2);
    const double fit = (b * procrustes_rotation(a, b) - a).squaredNorm();
    double best = 1e300;
    for (int deg = 0; deg < 360; ++deg) {
      const double t = deg * std::numbers::pi / 180.0;
      Eigen::MatrixXd g(2, 2);
      g << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      best = std::min(best, (b * g - a).squaredNorm());
    }
    beats_grid = beats_grid && fit <= best + 1e-12;
  }
  r.check(beats_grid, "closed form lost to the one-degree rotation grid");
}

void criterion_invariance(Reporter& r) {
  Rng rng(20240605);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8 + static_cast<int>(rng.uniform_below(8));
    auto view = testutil::random_view(rng, n, trial % 2 == 0, 0.3, 0.1);
    auto s = testutil::random_state(rng, n, 2);
    const double base = surrogate_objective(view, s);
    const Eigen::MatrixXd q = testutil::random_orthogonal(rng, 2);
    ViewVariationalState t = s;
    t.positions = s.positions * q;
    t.cov = q.transpose() * s.cov * q;
    worst = std::max(worst, std::fabs(surrogate_objective(view, t) - base));
  }
  r.note("worst objective change %.2e under random joint rotations", worst);
  r.check(worst < 1e-8, "surrogate changed by >= 1e-8 under a joint rotation");
}

void dataset_summary(Reporter& r, const DatasetBundle& b) {
  for (int v = 0; v < b.net.view_count(); ++v) {
    const auto& view = b.net.views[static_cast<std::size_t>(v)];
    const Density d = density_both(view);
    r.note("%s: %ld ordered links, density %.4f (ordered) %.4f (pairs)",
           view.label().c_str(), view.link_count(), d.per_ordered_dyad, d.per_pair);
  }
  r.note("joint fit: converged=%d iters=%d best=%d", b.joint.report.converged ? 1 : 0,
         b.joint.report.iterations, b.joint.report.best_restart);
  for (int v = 0; v < b.net.view_count(); ++v)
    r.note("alpha means: single %.3f joint %.3f",
           b.singles[static_cast<std::size_t>(v)].state.xi_tilde,
           b.joint.view_states[static_cast<std::size_t>(v)].xi_tilde);
}

double pooled_misclass(const CvResult& cv, int view) {
  return cv.views[static_cast<std::size_t>(view)].counts.misclassification();
}

void criterion_girls(Reporter& r, const DatasetBundle& b) {
  r.note("source: %s", b.real ? "original data" : "synthetic stand-in");
  r.check(b.net.n() == 50, "expected 50 nodes");
  const long expect_links[3] = {113, 116, 122};
  const double expect_density[3] = {0.046, 0.047, 0.049};
  for (int v = 0; v < 3; ++v) {
    const auto& view = b.net.views[static_cast<std::size_t>(v)];
    r.check(view.directed(), "girls views must be directed");
    r.check(view.link_count() == expect_links[v],
            "view " + std::to_string(v + 1) + " link count != " +
                std::to_string(expect_links[v]));
    r.check(std::fabs(density(view) - expect_density[v]) < 1e-3,
            "view " + std::to_string(v + 1) + " density off by >= 1e-3");
  }
  dataset_summary(r, b);

  // Threshold self-consistency: the reported tau is the median of the fitted
  // link probabilities over each view's observed links.
  for (int v = 0; v < 3; ++v) {
    const auto& view = b.net.views[static_cast<std::size_t>(v)];
    const auto& st = b.joint.view_states[static_cast<std::size_t>(v)];
    const auto probs =
        link_probability_matrix(st.positions, st.xi_tilde, v, PositionSource::PerView);
    std::vector<double> linked;
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j)
        if (i != j && view.observed(i, j) && view.y(i, j))
          linked.push_back(probs.probs(i, j));
    std::sort(linked.begin(), linked.end());
    const double med = linked.size() % 2 == 1
                           ? linked[linked.size() / 2]
                           : 0.5 * (linked[linked.size() / 2 - 1] +
                                    linked[linked.size() / 2]);
    const double tau = threshold_tau(view, probs.probs);
    r.check(std::fabs(tau - med) < 1e-12, "tau is not the training-link median");
  }

  if (b.real) {
    const double lsm_alpha[3] = {-0.63, -0.66, -0.48};
    const double lsjm_alpha[3] = {-0.42, -0.39, -0.32};
    for (int v = 0; v < 3; ++v) {
      r.band(b.singles[static_cast<std::size_t>(v)].state.xi_tilde, lsm_alpha[v], 0.15,
             "single-model alpha mean, view " + std::to_string(v + 1));
      r.band(b.joint.view_states[static_cast<std::size_t>(v)].xi_tilde, lsjm_alpha[v],
             0.15, "joint-model alpha mean, view " + std::to_string(v + 1));
    }
    const double lsm_mis[3] = {0.04, 0.05, 0.05};
    for (int v = 0; v < 3; ++v) {
      r.band(pooled_misclass(b.cv_dyad_lsjm, v), 0.04, 0.03,
             "joint dyad-CV misclassification, view " + std::to_string(v + 1));
      r.band(pooled_misclass(b.cv_dyad_lsm, v), lsm_mis[v], 0.03,
             "single dyad-CV misclassification, view " + std::to_string(v + 1));
      r.band(pooled_misclass(b.cv_node, v), 0.09, 0.04,
             "node-CV misclassification, view " + std::to_string(v + 1));
    }
  } else {
    // Regression guard against the values this build produced when first
    // validated; loose enough to absorb libm-level drift across platforms.
    r.note("alpha/misclassification bands need the original data: SKIP "
           "(set LSJM_GIRLS_DIR); property criteria cover the stand-in");
    r.check(std::fabs(b.joint.report.objective_trace.back() - (-641.82)) < 8.0,
            "joint objective drifted from the frozen reference run");
    for (int v = 0; v < 3; ++v) {
      r.note("dyad-CV misclassification (joint) view %d: %.4f", v + 1,
             pooled_misclass(b.cv_dyad_lsjm, v));
      r.note("node-CV misclassification view %d: %.4f", v + 1,
             pooled_misclass(b.cv_node, v));
    }
  }
  r.note("girls block took %.1f s", b.seconds);
  r.check(b.seconds < 300.0, "girls block exceeded 5 minutes");
}

void criterion_protein(Reporter& r, const DatasetBundle& b) {
  r.note("source: %s", b.real ? "original data" : "synthetic stand-in");
  r.check(b.net.n() == 67, "expected 67 nodes");
  const long expect_pairs[2] = {294, 190};
  const double expect_density[2] = {0.066, 0.043};
  for (int v = 0; v < 2; ++v) {
    const auto& view = b.net.views[static_cast<std::size_t>(v)];
    r.check(!view.directed(), "protein views must be undirected");
    r.check(view.pair_link_count() == expect_pairs[v],
            "view " + std::to_string(v + 1) + " pair count != " +
                std::to_string(expect_pairs[v]));
    r.check(std::fabs(density_both(view).per_ordered_dyad - expect_density[v]) < 1e-3,
            "view " + std::to_string(v + 1) +
                " density (ordered convention) off by >= 1e-3");
  }
  dataset_summary(r, b);

  if (b.real) {
    const double lsm_alpha[2] = {-0.332, -1.001};
    const double lsjm_alpha[2] = {-0.410, -0.940};
    for (int v = 0; v < 2; ++v) {
      r.band(b.singles[static_cast<std::size_t>(v)].state.xi_tilde, lsm_alpha[v], 0.15,
             "single-model alpha mean, view " + std::to_string(v + 1));
      r.band(b.joint.view_states[static_cast<std::size_t>(v)].xi_tilde, lsjm_alpha[v],
             0.15, "joint-model alpha mean, view " + std::to_string(v + 1));
    }
    const double dyad_mis[2] = {0.09, 0.06};
    const double node_mis[2] = {0.24, 0.20};
    for (int v = 0; v < 2; ++v) {
      r.band(pooled_misclass(b.cv_dyad_lsjm, v), dyad_mis[v], 0.04,
             "joint dyad-CV misclassification, view " + std::to_string(v + 1));
      r.band(pooled_misclass(b.cv_node, v), node_mis[v], 0.05,
             "node-CV misclassification, view " + std::to_string(v + 1));
    }
  } else {
    r.note("alpha/misclassification bands need the original data: SKIP "
           "(set LSJM_PROTEIN_DIR); property criteria cover the stand-in");
    r.check(std::fabs(b.joint.report.objective_trace.back() - (-1444.43)) < 15.0,
            "joint objective drifted from the frozen reference run");
    for (int v = 0; v < 2; ++v) {
      r.note("dyad-CV misclassification (joint) view %d: %.4f", v + 1,
             pooled_misclass(b.cv_dyad_lsjm, v));
      r.note("node-CV misclassification view %d: %.4f", v + 1,
             pooled_misclass(b.cv_node, v));
    }
  }
  r.note("protein block took %.1f s", b.seconds);
  r.check(b.seconds < 300.0, "protein block exceeded 5 minutes");
}

void criterion_auc(Reporter& r, const DatasetBundle& girls, const DatasetBundle& protein) {
  for (const DatasetBundle* b : {&girls, &protein}) {
    for (int v = 0; v < b->net.view_count(); ++v) {
      const auto& view = b->net.views[static_cast<std::size_t>(v)];
      const auto& joint_state = b->joint.view_states[static_cast<std::size_t>(v)];
      const auto& single_state = b->singles[static_cast<std::size_t>(v)].state;
      const double auc_joint =
          roc_auc(insample_scores(
                      view, link_probability_matrix(joint_state.positions,
                                                    joint_state.xi_tilde, v,
                                                    PositionSource::PerView)
                                .probs))
              .auc;
      const double auc_single =
          roc_auc(insample_scores(
                      view, link_probability_matrix(single_state.positions,
                                                    single_state.xi_tilde, v,
                                                    PositionSource::PerView)
                                .probs))
              .auc;
      r.note("%s in-sample AUC: single %.3f joint %.3f", view.label().c_str(),
             auc_single, auc_joint);
      r.check(auc_single > 0.8, view.label() + ": single-model AUC <= 0.8");
      r.check(auc_joint > 0.8, view.label() + ": joint-model AUC <= 0.8");
    }
  }
  const auto& lsjm_roc = protein.cv_dyad_lsjm.views[0].roc;
  const auto& lsm_roc = protein.cv_dyad_lsm.views[0].roc;
  if (!lsjm_roc || !lsm_roc) {
    r.fail("genetic-view CV ROC unavailable");
    return;
  }
  r.note("genetic dyad-CV AUC: joint %.4f single %.4f", lsjm_roc->auc, lsm_roc->auc);
  r.check(lsjm_roc->auc >= lsm_roc->auc - 0.02,
          "joint CV AUC fell more than 0.02 below the single-model AUC");
}

void criterion_determinism(Reporter& r, const DatasetBundle& girls) {
  const fs::path base = fs::temp_directory_path() / "lsjm_acceptance_det";
  fs::remove_all(base);
  std::string inputs;
  for (const auto& p : girls.paths) inputs += " " + p;
  const std::string flags = " --seed 99 --restarts 3 --max-iters 120 --out ";
  const std::string a = (base / "a").string(), b = (base / "b").string();
  const std::string cli = std::string(LSJM_CLI_PATH);
  int rc1 = std::system((cli + " fit-lsjm" + inputs + flags + a + " > /dev/null 2>&1").c_str());
  int rc2 = std::system((cli + " fit-lsjm" + inputs + flags + b + " > /dev/null 2>&1").c_str());
  r.check(WEXITSTATUS(rc1) <= 2 && WEXITSTATUS(rc2) <= 2, "cli runs failed");
  for (const char* f : {"model.artifact", "trace.csv", "positions.csv", "ellipses.csv",
                        "arrows.csv", "report.json", "fused.svg"}) {
    const std::string fa = read_file((fs::path(a) / f).string());
    const std::string fb = read_file((fs::path(b) / f).string());
    if (fa != fb) r.fail(std::string(f) + " differs between identical runs");
  }
  r.note("compared 7 artifact files byte for byte");
}

void criterion_convergence(Reporter& r, const DatasetBundle& girls,
                           const DatasetBundle& protein) {
  for (const DatasetBundle* b : {&girls, &protein}) {
    const auto& restarts = b->joint.report.restarts;
    int stopped = 0;
    for (const auto& rec : restarts)
      if (rec.converged && rec.iterations < 500) ++stopped;
    r.note("%s: stopping rule met before 500 iterations on %d/%zu restarts",
           b->name.c_str(), stopped, restarts.size());
    r.check(stopped >= 9, b->name + ": stopping rule met on fewer than 9/10 restarts");

    const auto& best = restarts[static_cast<std::size_t>(b->joint.report.best_restart)];
    bool above_all = true;
    for (const auto& rec : restarts)
      above_all = above_all && best.final_objective > rec.initial_objective;
    r.check(above_all,
            b->name + ": selected restart does not beat every initial objective");
  }
}

}  // namespace

int main() {
  kernels::apply_thread_cap_from_env();
  std::printf("acceptance suite (%s)\n", kVersion);

  DatasetBundle girls, protein;
  try {
    girls = make_bundle("girls", "LSJM_GIRLS_DIR",
                        {"girls1.edges", "girls2.edges", "girls3.edges"});
    protein = make_bundle("protein", "LSJM_PROTEIN_DIR",
                          {"genetic.edges", "physical.edges"});
  } catch (const std::exception& e) {
    std::printf("[FAIL] dataset preparation: %s\n", e.what());
    return 1;
  }

  struct Criterion {
    const char* name;
    std::function<void(Reporter&)> run;
  };
  const std::vector<Criterion> criteria{
      {"derivative-correctness", criterion_derivatives},
      {"mgf-identity", criterion_mgf},
      {"fusion-oracle", criterion_fusion},
      {"procrustes-alignment", criterion_procrustes},
      {"orthogonal-invariance", criterion_invariance},
      {"girls-dataset", [&](Reporter& r) { criterion_girls(r, girls); }},
      {"protein-dataset", [&](Reporter& r) { criterion_protein(r, protein); }},
      {"auc-properties", [&](Reporter& r) { criterion_auc(r, girls, protein); }},
      {"determinism", [&](Reporter& r) { criterion_determinism(r, girls); }},
      {"convergence-behavior",
       [&](Reporter& r) { criterion_convergence(r, girls, protein); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    std::printf("--- %s\n", c.name);
    Reporter r;
    try {
      c.run(r);
    } catch (const std::exception& e) {
      r.fail(std::string("exception: ") + e.what());
    }
    if (r.failures.empty()) {
      std::printf("[PASS] %s\n", c.name);
    } else {
      ++failures;
      std::printf("[FAIL] %s\n", c.name);
      for (const auto& f : r.failures) std::printf("       %s\n", f.c_str());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
