// Command-line front end: fit a latent space model to one network view, fit
// the joint model to several views over one node set, or cross-validate link
// prediction. Outputs are deterministic given the seed and configuration.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "lsjm/errors.hpp"
#include "lsjm/io.hpp"
#include "lsjm/kernels.hpp"
#include "lsjm/lsjm.hpp"
#include "lsjm/prediction.hpp"
#include "lsjm/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsjm;

namespace {

struct Options {
  std::vector<std::string> inputs;
  std::string out = "out";
  double prior_xi = 0.0;
  double prior_psi2 = 2.0;
  double sigma2 = 1.0;
  int dim = 2;
  double tol = 1e-2;
  int min_iters = 10;
  int max_iters = 1000;
  int restarts = 10;
  std::uint64_t seed = 1;
  bool baseline = false;
  std::string mode = "dyads";
  std::string estimator = "lsjm";
  int folds = 10;
};

void add_common_flags(CLI::App* cmd, Options& opt) {
  cmd->add_option("inputs", opt.inputs, "edge-list files, one per view")
      ->required()
      ->expected(-1);
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--prior-xi", opt.prior_xi, "prior mean of the intercept");
  cmd->add_option("--prior-psi2", opt.prior_psi2, "prior variance of the intercept");
  cmd->add_option("--sigma2", opt.sigma2, "prior variance of the latent positions");
  cmd->add_option("--dim", opt.dim, "latent dimension");
  cmd->add_option("--tol", opt.tol, "stopping tolerance on the objective");
  cmd->add_option("--min-iters", opt.min_iters, "iterations before stopping is allowed");
  cmd->add_option("--max-iters", opt.max_iters, "iteration cap");
  cmd->add_option("--restarts", opt.restarts, "random restarts");
  cmd->add_option("--seed", opt.seed, "seed for all randomness");
}

PriorConfig prior_from(const Options& opt) {
  PriorConfig p;
  p.xi = opt.prior_xi;
  p.psi2 = opt.prior_psi2;
  p.sigma2 = opt.sigma2;
  p.dim = opt.dim;
  p.validate();
  return p;
}

FitConfig fit_config_from(const Options& opt) {
  FitConfig c;
  c.tol = opt.tol;
  c.min_iters = opt.min_iters;
  c.max_iters = opt.max_iters;
  c.restarts = opt.restarts;
  c.seed = opt.seed;
  return c.normalized();
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

struct LoadedData {
  MultiplexNetwork net;
  std::uint64_t fingerprint = 0;
};

LoadedData load_views(const std::vector<std::string>& paths) {
  std::vector<ParsedView> parsed;
  parsed.reserve(paths.size());
  for (const auto& p : paths) parsed.push_back(parse_edge_list(read_file(p), stem_of(p)));
  for (std::size_t k = 1; k < parsed.size(); ++k) {
    if (parsed[k].nodes.labels() != parsed[0].nodes.labels())
      throw DimensionMismatch(
          "node-set mismatch between '" + paths[0] + "' and '" + paths[k] +
          "'; declare matching '# nodes:' headers");
  }
  std::vector<AdjacencyView> views;
  for (auto& pv : parsed) views.push_back(std::move(pv.view));
  LoadedData out{build_multiplex(std::move(parsed[0].nodes), std::move(views)),
                 fingerprint_files(paths)};
  return out;
}

json config_json(const Options& opt, const std::string& subcommand) {
  json j;
  j["subcommand"] = subcommand;
  j["out"] = opt.out;
  j["prior_xi"] = opt.prior_xi;
  j["prior_psi2"] = opt.prior_psi2;
  j["sigma2"] = opt.sigma2;
  j["dim"] = opt.dim;
  j["tol"] = opt.tol;
  j["min_iters"] = opt.min_iters;
  j["max_iters"] = opt.max_iters;
  j["restarts"] = opt.restarts;
  j["seed"] = opt.seed;
  if (subcommand == "cross-validate") {
    j["mode"] = opt.mode;
    j["estimator"] = opt.estimator;
    j["folds"] = opt.folds;
  }
  if (subcommand == "fit-lsjm") j["baseline"] = opt.baseline;
  return j;
}

void write_manifest(const fs::path& dir, const Options& opt, const std::string& subcommand) {
  json m;
  m["tool"] = kToolName;
  m["version"] = kVersion;
  m["config"] = config_json(opt, subcommand);
  m["inputs"] = json::array();
  for (const auto& p : opt.inputs) {
    const std::string body = read_file(p);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(body.data(), body.size())));
    m["inputs"].push_back({{"path", p}, {"hash", hex}});
  }
  write_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

ModelArtifact artifact_from(const LoadedData& data, const LsjmFit& fit,
                            const std::string& kind) {
  ModelArtifact a;
  a.kind = kind;
  a.node_labels = data.net.nodes.labels();
  a.sigma2 = fit.priors[0].sigma2;
  a.fingerprint = data.fingerprint;
  a.priors = fit.priors;
  for (const auto& v : data.net.views) {
    a.view_labels.push_back(v.label());
    a.view_directed.push_back(v.directed());
  }
  a.view_states = fit.view_states;
  a.fused = fit.fused;
  a.report = fit.report;
  return a;
}

std::string trace_csv(const FitReport& report) {
  std::string out = "iteration,objective\n";
  for (std::size_t t = 0; t < report.objective_trace.size(); ++t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", t + 1, report.objective_trace[t]);
    out += buf;
  }
  return out;
}

std::string roc_csv(const RocResult& roc) {
  std::string out = "fpr,tpr\n";
  for (const auto& [fpr, tpr] : roc.points) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", fpr, tpr);
    out += buf;
  }
  return out;
}

SvgScene scene_for_view(const ModelArtifact& a, int k, bool fused) {
  SvgScene scene;
  const Eigen::MatrixXd& pos =
      fused ? a.fused.positions : a.view_states[static_cast<std::size_t>(k)].positions;
  const Eigen::MatrixXd& cov =
      fused ? a.fused.cov : a.view_states[static_cast<std::size_t>(k)].cov;
  scene.title = fused ? "fused positions" : a.view_labels[static_cast<std::size_t>(k)];
  for (int i = 0; i < a.n(); ++i) {
    scene.points.push_back({pos(i, 0), pos(i, 1)});
    scene.labels.push_back(a.node_labels[static_cast<std::size_t>(i)]);
  }
  const Eigen::Matrix2d c2 = cov;
  for (int i = 0; i < a.n(); ++i)
    scene.ellipses.push_back(credible_ellipse(pos(i, 0), pos(i, 1), c2));
  return scene;
}

SvgScene scene_with_arrows(const ModelArtifact& a) {
  SvgScene scene;
  scene.title = "fused positions with per-view trajectories";
  for (int i = 0; i < a.n(); ++i) {
    scene.points.push_back({a.fused.positions(i, 0), a.fused.positions(i, 1)});
    scene.labels.push_back(a.node_labels[static_cast<std::size_t>(i)]);
  }
  for (int k = 0; k + 1 < a.view_count(); ++k) {
    const auto& from = a.view_states[static_cast<std::size_t>(k)].positions;
    const auto& to = a.view_states[static_cast<std::size_t>(k) + 1].positions;
    for (int i = 0; i < a.n(); ++i)
      scene.arrows.push_back({from(i, 0), from(i, 1), to(i, 0), to(i, 1)});
  }
  return scene;
}

json view_report(const AdjacencyView& view, const ViewVariationalState& state,
                 const FusedPosterior& fused) {
  json v;
  v["label"] = view.label();
  v["directed"] = view.directed();
  v["links_ordered"] = view.link_count();
  v["links_pairs"] = view.pair_link_count();
  const Density d = density_both(view);
  v["density_per_ordered_dyad"] = d.per_ordered_dyad;
  v["density_per_pair"] = d.per_pair;
  v["xi_tilde"] = state.xi_tilde;
  v["psi2_tilde"] = state.psi2_tilde;

  const auto own = link_probability_matrix(state.positions, state.xi_tilde, 0,
                                           PositionSource::PerView);
  const auto via_fused =
      link_probability_matrix(fused.positions, state.xi_tilde, 0, PositionSource::Fused);
  try {
    v["insample_auc"] = roc_auc(insample_scores(view, own.probs)).auc;
    v["insample_auc_fused"] = roc_auc(insample_scores(view, via_fused.probs)).auc;
  } catch (const DegenerateLabels&) {
    v["insample_auc"] = nullptr;
    v["insample_auc_fused"] = nullptr;
  }
  try {
    v["tau"] = threshold_tau(view, own.probs);
  } catch (const NoObservedLinks&) {
    v["tau"] = nullptr;
  }
  return v;
}

void emit_fit_outputs(const fs::path& dir, const LoadedData& data, const LsjmFit& fit,
                      const std::string& kind, const Options& opt) {
  const ModelArtifact art = artifact_from(data, fit, kind);
  write_file((dir / "model.artifact").string(), serialize_artifact(art));
  write_file((dir / "trace.csv").string(), trace_csv(fit.report));
  write_file((dir / "positions.csv").string(), positions_csv(art));
  if (opt.dim == 2) {
    write_file((dir / "ellipses.csv").string(), ellipses_csv(art));
    for (int k = 0; k < art.view_count(); ++k) {
      write_file((dir / ("view_" + art.view_labels[static_cast<std::size_t>(k)] + ".svg"))
                     .string(),
                 render_svg(scene_for_view(art, k, false)));
    }
    write_file((dir / "fused.svg").string(),
               render_svg(scene_for_view(art, 0, true)));
    if (art.view_count() > 1) {
      write_file((dir / "arrows.csv").string(), arrows_csv(art));
      write_file((dir / "arrows.svg").string(), render_svg(scene_with_arrows(art)));
    }
  } else {
    std::cerr << "note: ellipse and svg output need --dim 2; skipped\n";
  }

  json rep;
  rep["kind"] = kind;
  rep["iterations"] = fit.report.iterations;
  rep["converged"] = fit.report.converged;
  rep["best_restart"] = fit.report.best_restart;
  rep["final_objective"] = fit.report.objective_trace.empty()
                               ? json(nullptr)
                               : json(fit.report.objective_trace.back());
  rep["warnings"] = fit.report.warnings;
  rep["restarts"] = json::array();
  for (const auto& r : fit.report.restarts)
    rep["restarts"].push_back({{"iterations", r.iterations},
                               {"converged", r.converged},
                               {"initial_objective", r.initial_objective},
                               {"final_objective", r.final_objective}});
  rep["views"] = json::array();
  for (int k = 0; k < data.net.view_count(); ++k) {
    json v = view_report(data.net.views[static_cast<std::size_t>(k)],
                         fit.view_states[static_cast<std::size_t>(k)], fit.fused);
    // In-sample ROC points for plotting.
    const auto own = link_probability_matrix(
        fit.view_states[static_cast<std::size_t>(k)].positions,
        fit.view_states[static_cast<std::size_t>(k)].xi_tilde, k, PositionSource::PerView);
    try {
      const auto roc =
          roc_auc(insample_scores(data.net.views[static_cast<std::size_t>(k)], own.probs));
      write_file((dir / ("insample_roc_" +
                         data.net.views[static_cast<std::size_t>(k)].label() + ".csv"))
                     .string(),
                 roc_csv(roc));
    } catch (const DegenerateLabels&) {
    }
    rep["views"].push_back(std::move(v));
  }
  write_file((dir / "report.json").string(), rep.dump(2) + "\n");
}

int finish(const LsjmFit& fit) { return fit.report.converged ? 0 : 2; }

int cmd_fit_lsm(const Options& opt) {
  const LoadedData data = load_views(opt.inputs);
  if (data.net.view_count() != 1)
    throw InvalidConfig("fit-lsm takes exactly one input view");
  const PriorConfig prior = prior_from(opt);
  const FitConfig cfg = fit_config_from(opt);
  const LsjmFit fit = fit_lsjm(data.net, {prior}, cfg);

  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_manifest(dir, opt, "fit-lsm");
  emit_fit_outputs(dir, data, fit, "lsm", opt);
  if (!fit.report.converged)
    std::cerr << "warning: stopped at the iteration cap without converging\n";
  return finish(fit);
}

int cmd_fit_lsjm(const Options& opt) {
  const LoadedData data = load_views(opt.inputs);
  const PriorConfig prior = prior_from(opt);
  const std::vector<PriorConfig> priors(static_cast<std::size_t>(data.net.view_count()),
                                        prior);
  const FitConfig cfg = fit_config_from(opt);
  const LsjmFit fit = fit_lsjm(data.net, priors, cfg);

  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_manifest(dir, opt, "fit-lsjm");
  emit_fit_outputs(dir, data, fit, data.net.view_count() == 1 ? "lsm" : "lsjm", opt);

  if (opt.baseline) {
    // Independent single-view fits, rotated onto the joint solution so the
    // plots share one orientation.
    json base = json::array();
    for (int k = 0; k < data.net.view_count(); ++k) {
      const auto& view = data.net.views[static_cast<std::size_t>(k)];
      LsmFit single = fit_lsm(view, prior, cfg);
      const Eigen::MatrixXd rot = procrustes_rotation(
          fit.view_states[static_cast<std::size_t>(k)].positions, single.state.positions);
      single.state.positions = (single.state.positions * rot).eval();
      Eigen::MatrixXd c = rot.transpose() * single.state.cov * rot;
      single.state.cov = 0.5 * (c + c.transpose()).eval();

      json v = view_report(view, single.state, FusedPosterior{single.state.positions,
                                                              single.state.cov});
      v["converged"] = single.report.converged;
      v["iterations"] = single.report.iterations;
      base.push_back(std::move(v));

      if (opt.dim == 2) {
        ModelArtifact one;
        one.kind = "lsm";
        one.node_labels = data.net.nodes.labels();
        one.sigma2 = prior.sigma2;
        one.priors = {prior};
        one.view_labels = {view.label()};
        one.view_directed = {view.directed()};
        one.view_states = {single.state};
        one.fused = {single.state.positions, single.state.cov};
        one.report = single.report;
        write_file((dir / ("baseline_" + view.label() + ".svg")).string(),
                   render_svg(scene_for_view(one, 0, false)));
        write_file((dir / ("baseline_" + view.label() + ".positions.csv")).string(),
                   positions_csv(one));
      }
    }
    write_file((dir / "baseline.json").string(), base.dump(2) + "\n");
  }
  if (!fit.report.converged)
    std::cerr << "warning: stopped at the iteration cap without converging\n";
  return finish(fit);
}

int cmd_cross_validate(const Options& opt) {
  const LoadedData data = load_views(opt.inputs);
  const PriorConfig prior = prior_from(opt);
  const std::vector<PriorConfig> priors(static_cast<std::size_t>(data.net.view_count()),
                                        prior);
  const FitConfig cfg = fit_config_from(opt);

  CvMode mode;
  if (opt.mode == "dyads")
    mode = CvMode::Dyads;
  else if (opt.mode == "nodes")
    mode = CvMode::Nodes;
  else
    throw InvalidPlan("--mode must be dyads or nodes");
  Estimator estimator;
  if (opt.estimator == "lsjm")
    estimator = Estimator::Lsjm;
  else if (opt.estimator == "lsm")
    estimator = Estimator::SingleLsmPerView;
  else
    throw InvalidPlan("--estimator must be lsjm or lsm");

  const CvPlan plan = make_cv_plan(data.net, mode, opt.folds, opt.seed);
  const CvResult cv = run_cv(data.net, priors, cfg, plan, estimator);

  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_manifest(dir, opt, "cross-validate");

  json rep;
  rep["mode"] = opt.mode;
  rep["estimator"] = opt.estimator;
  rep["folds"] = opt.folds;
  rep["failed_folds"] = cv.failed_folds;
  rep["views"] = json::array();
  std::string folds_csv = "fold,view,held_out,tp,fp,tn,fn,misclassification,auc\n";
  for (const auto& fv : cv.folds) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%d,%ld,%ld,%ld,%ld,%ld,%.10g,%s\n", fv.fold,
                  fv.view, fv.counts.held_out(), fv.counts.tp, fv.counts.fp, fv.counts.tn,
                  fv.counts.fn, fv.counts.misclassification(),
                  fv.auc ? std::to_string(*fv.auc).c_str() : "NA");
    folds_csv += buf;
  }
  write_file((dir / "cv_folds.csv").string(), folds_csv);
  for (const auto& vs : cv.views) {
    const auto& label = data.net.views[static_cast<std::size_t>(vs.view)].label();
    json v;
    v["label"] = label;
    v["held_out"] = vs.counts.held_out();
    v["misclassification"] = vs.counts.misclassification();
    v["tp"] = vs.counts.tp;
    v["fp"] = vs.counts.fp;
    v["tn"] = vs.counts.tn;
    v["fn"] = vs.counts.fn;
    v["auc"] = vs.roc ? json(vs.roc->auc) : json(nullptr);
    rep["views"].push_back(std::move(v));
    if (vs.roc) write_file((dir / ("cv_roc_" + label + ".csv")).string(), roc_csv(*vs.roc));
  }
  write_file((dir / "cv_report.json").string(), rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  kernels::apply_thread_cap_from_env();

  CLI::App app{"Latent space network models: single-view variational fits, multi-view "
               "joint fits, and link-prediction cross-validation"};
  app.require_subcommand(1);

  Options opt_lsm, opt_lsjm, opt_cv;
  CLI::App* fit_lsm_cmd =
      app.add_subcommand("fit-lsm", "fit one view with the latent space model");
  add_common_flags(fit_lsm_cmd, opt_lsm);
  CLI::App* fit_lsjm_cmd =
      app.add_subcommand("fit-lsjm", "fit several views with the joint model");
  add_common_flags(fit_lsjm_cmd, opt_lsjm);
  fit_lsjm_cmd->add_flag("--baseline", opt_lsjm.baseline,
                         "also fit per-view baselines aligned to the joint solution");
  CLI::App* cv_cmd = app.add_subcommand("cross-validate", "k-fold link prediction");
  add_common_flags(cv_cmd, opt_cv);
  cv_cmd->add_option("--mode", opt_cv.mode, "dyads or nodes");
  cv_cmd->add_option("--estimator", opt_cv.estimator, "lsjm or lsm");
  cv_cmd->add_option("--folds", opt_cv.folds, "number of folds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (fit_lsm_cmd->parsed()) return cmd_fit_lsm(opt_lsm);
    if (fit_lsjm_cmd->parsed()) return cmd_fit_lsjm(opt_lsjm);
    return cmd_cross_validate(opt_cv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
