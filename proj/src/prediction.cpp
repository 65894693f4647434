#include "lsjm/prediction.hpp"

#include <algorithm>
#include <cmath>

#include "lsjm/errors.hpp"
#include "lsjm/rng.hpp"

namespace lsjm {

double link_probability(const Eigen::VectorXd& zi, const Eigen::VectorXd& zj,
                        double xi_tilde) {
  return kernels::sigmoid(xi_tilde - (zi - zj).squaredNorm());
}

LinkProbabilityMatrix link_probability_matrix(const Eigen::MatrixXd& positions,
                                              double xi_tilde, int view,
                                              PositionSource source) {
  const int n = static_cast<int>(positions.rows());
  LinkProbabilityMatrix out;
  out.view = view;
  out.source = source;
  out.probs = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double sqdist = (positions.row(i) - positions.row(j)).squaredNorm();
      const double p = kernels::sigmoid(xi_tilde - sqdist);
      out.probs(i, j) = p;
      out.probs(j, i) = p;
    }
  }
  return out;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

double threshold_tau(const AdjacencyView& view, const Eigen::MatrixXd& probs) {
  std::vector<double> linked;
  const int n = view.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i || !view.observed(i, j) || !view.y(i, j)) continue;
      if (!view.directed() && j < i) continue;  // each pair once
      linked.push_back(probs(i, j));
    }
  }
  if (linked.empty()) throw NoObservedLinks("view has no observed links");
  return median(std::move(linked));
}

RocResult roc_auc(const std::vector<ScoredLabel>& scores) {
  long pos = 0, neg = 0;
  for (const auto& s : scores) (s.label ? pos : neg) += 1;
  if (pos == 0 || neg == 0)
    throw DegenerateLabels("need at least one positive and one negative");

  std::vector<ScoredLabel> sorted = scores;
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  RocResult out;
  out.points.emplace_back(0.0, 0.0);
  long tp = 0, fp = 0;
  // Mann-Whitney with rank averaging, in integers: every (pos, neg) pair with a
  // higher positive score counts 2, a tie counts 1.
  long long twice_u = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    long gpos = 0, gneg = 0;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      (sorted[j].label ? gpos : gneg) += 1;
      ++j;
    }
    twice_u += 2LL * gpos * (neg - fp - gneg);  // negatives strictly below
    twice_u += 1LL * gpos * gneg;               // tied negatives
    tp += gpos;
    fp += gneg;
    out.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos));
    i = j;
  }
  out.auc = static_cast<double>(twice_u) /
            (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return out;
}

std::vector<ScoredLabel> insample_scores(const AdjacencyView& view,
                                         const Eigen::MatrixXd& probs) {
  std::vector<ScoredLabel> out;
  const int n = view.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i || !view.observed(i, j)) continue;
      if (!view.directed() && j < i) continue;
      out.push_back({probs(i, j), view.y(i, j) ? 1 : 0});
    }
  }
  return out;
}

namespace {

bool any_directed(const MultiplexNetwork& net) {
  for (const auto& v : net.views)
    if (v.directed()) return true;
  return false;
}

// Item index <-> dyad. Ordered items enumerate (i, j), i != j, row-major with
// the diagonal skipped; pair items enumerate (i, j), i < j, lexicographically.
std::pair<int, int> item_to_dyad(const CvPlan& plan, long item) {
  const long n = plan.n;
  if (plan.ordered_dyads) {
    const long row = item / (n - 1);
    long col = item % (n - 1);
    if (col >= row) ++col;
    return {static_cast<int>(row), static_cast<int>(col)};
  }
  long i = 0;
  long remaining = item;
  long row_len = n - 1;
  while (remaining >= row_len) {
    remaining -= row_len;
    ++i;
    --row_len;
  }
  return {static_cast<int>(i), static_cast<int>(i + 1 + remaining)};
}

}  // namespace

CvPlan make_cv_plan(const MultiplexNetwork& net, CvMode mode, int folds,
                    std::uint64_t seed) {
  CvPlan plan;
  plan.mode = mode;
  plan.folds = folds;
  plan.seed = seed;
  plan.n = net.n();
  plan.ordered_dyads = any_directed(net);

  long items = 0;
  const long n = plan.n;
  if (mode == CvMode::Nodes) {
    items = n;
  } else {
    items = plan.ordered_dyads ? n * (n - 1) : n * (n - 1) / 2;
  }
  if (folds < 2) throw InvalidPlan("need at least 2 folds");
  if (folds > items) throw InvalidPlan("more folds than items");

  std::vector<long> order(static_cast<std::size_t>(items));
  for (long t = 0; t < items; ++t) order[static_cast<std::size_t>(t)] = t;
  Rng rng(substream_seed(seed, "cvplan", 0));
  rng.shuffle(order);

  plan.assignment.assign(static_cast<std::size_t>(items), 0);
  for (long t = 0; t < items; ++t)
    plan.assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] =
        static_cast<int>(t % folds);
  return plan;
}

namespace {

struct FoldPredictions {
  // Positions and intercepts to predict from, already chosen per estimator.
  std::vector<Eigen::MatrixXd> probs;  // one matrix per view
};

FoldPredictions fit_and_predict(const MultiplexNetwork& masked,
                                const std::vector<PriorConfig>& priors,
                                const FitConfig& cfg, Estimator estimator) {
  FoldPredictions out;
  const int k = masked.view_count();
  out.probs.reserve(static_cast<std::size_t>(k));
  if (estimator == Estimator::Lsjm) {
    const LsjmFit fit = fit_lsjm(masked, priors, cfg);
    for (int v = 0; v < k; ++v) {
      out.probs.push_back(link_probability_matrix(fit.fused.positions,
                                                  fit.view_states[v].xi_tilde, v,
                                                  PositionSource::Fused)
                              .probs);
    }
  } else {
    for (int v = 0; v < k; ++v) {
      const LsmFit fit = fit_lsm(masked.views[static_cast<std::size_t>(v)],
                                 priors[static_cast<std::size_t>(v)], cfg);
      out.probs.push_back(link_probability_matrix(fit.state.positions, fit.state.xi_tilde,
                                                  v, PositionSource::PerView)
                              .probs);
    }
  }
  return out;
}

void score_dyad(const AdjacencyView& truth_view, const Eigen::MatrixXd& probs, double tau,
                int i, int j, CvCounts& counts, std::vector<ScoredLabel>& fold_scores,
                std::vector<ScoredLabel>& pooled_scores) {
  if (!truth_view.observed(i, j)) return;  // no ground truth for this dyad
  const int truth = truth_view.y(i, j) ? 1 : 0;
  const double p = probs(i, j);
  const bool predicted = p > tau;
  if (predicted && truth)
    ++counts.tp;
  else if (predicted && !truth)
    ++counts.fp;
  else if (!predicted && truth)
    ++counts.fn;
  else
    ++counts.tn;
  fold_scores.push_back({p, truth});
  pooled_scores.push_back({p, truth});
}

}  // namespace

CvResult run_cv(const MultiplexNetwork& net, const std::vector<PriorConfig>& priors,
                const FitConfig& fit_config, const CvPlan& plan, Estimator estimator) {
  if (plan.n != net.n()) throw InvalidPlan("plan was built for a different node count");
  if (plan.mode == CvMode::Nodes && estimator != Estimator::Lsjm)
    throw InvalidPlan("node mode needs the joint estimator; a single-view fit would "
                      "place hidden nodes from the prior alone");
  const int k = net.view_count();
  if (static_cast<int>(priors.size()) != k) throw InvalidConfig("need one prior per view");

  CvResult result;
  result.plan = plan;
  result.estimator = estimator;
  result.views.resize(static_cast<std::size_t>(k));
  for (int v = 0; v < k; ++v) result.views[static_cast<std::size_t>(v)].view = v;

  const long items = plan.item_count();

  if (plan.mode == CvMode::Dyads) {
    for (int f = 0; f < plan.folds; ++f) {
      MultiplexNetwork masked = net;
      std::vector<std::pair<int, int>> held;
      for (long t = 0; t < items; ++t) {
        if (plan.assignment[static_cast<std::size_t>(t)] != f) continue;
        const auto [i, j] = item_to_dyad(plan, t);
        held.emplace_back(i, j);
        for (auto& view : masked.views) view.set_observed(i, j, false);
      }

      FitConfig cfg = fit_config;
      cfg.seed = substream_seed(fit_config.seed, "fold", static_cast<std::uint64_t>(f));
      bool fit_failed = false;
      FoldPredictions pred;
      try {
        pred = fit_and_predict(masked, priors, cfg, estimator);
      } catch (const Error&) {
        fit_failed = true;
        ++result.failed_folds;
      }

      for (int v = 0; v < k; ++v) {
        CvFoldView fv;
        fv.fold = f;
        fv.view = v;
        if (fit_failed) {
          fv.failed = true;
          result.folds.push_back(fv);
          continue;
        }
        const auto& probs = pred.probs[static_cast<std::size_t>(v)];
        std::vector<ScoredLabel> fold_scores;
        try {
          const double tau = threshold_tau(masked.views[static_cast<std::size_t>(v)], probs);
          for (const auto& [i, j] : held)
            score_dyad(net.views[static_cast<std::size_t>(v)], probs, tau, i, j, fv.counts,
                       fold_scores, result.views[static_cast<std::size_t>(v)].scores);
          result.views[static_cast<std::size_t>(v)].counts.tp += fv.counts.tp;
          result.views[static_cast<std::size_t>(v)].counts.tn += fv.counts.tn;
          result.views[static_cast<std::size_t>(v)].counts.fp += fv.counts.fp;
          result.views[static_cast<std::size_t>(v)].counts.fn += fv.counts.fn;
        } catch (const NoObservedLinks&) {
          fv.failed = true;
        }
        if (!fv.failed) {
          try {
            fv.auc = roc_auc(fold_scores).auc;
          } catch (const DegenerateLabels&) {
          }
        }
        result.folds.push_back(fv);
      }
    }
  } else {
    // Node mode: hide every dyad touching the fold's nodes in one view at a
    // time, so the other views keep informing those nodes' positions.
    for (int f = 0; f < plan.folds; ++f) {
      std::vector<int> held_nodes;
      for (long t = 0; t < items; ++t)
        if (plan.assignment[static_cast<std::size_t>(t)] == f)
          held_nodes.push_back(static_cast<int>(t));

      for (int v = 0; v < k; ++v) {
        MultiplexNetwork masked = net;
        auto& target = masked.views[static_cast<std::size_t>(v)];
        for (int i : held_nodes) {
          for (int j = 0; j < plan.n; ++j) {
            if (j == i) continue;
            target.set_observed(i, j, false);
            target.set_observed(j, i, false);
          }
        }

        FitConfig cfg = fit_config;
        cfg.seed = substream_seed(
            substream_seed(fit_config.seed, "fold", static_cast<std::uint64_t>(f)), "view",
            static_cast<std::uint64_t>(v));

        CvFoldView fv;
        fv.fold = f;
        fv.view = v;
        std::vector<ScoredLabel> fold_scores;
        try {
          const FoldPredictions pred = fit_and_predict(masked, priors, cfg, estimator);
          const auto& probs = pred.probs[static_cast<std::size_t>(v)];
          const double tau = threshold_tau(target, probs);
          const auto& truth_view = net.views[static_cast<std::size_t>(v)];
          std::vector<std::uint8_t> is_held(static_cast<std::size_t>(plan.n), 0);
          for (int i : held_nodes) is_held[static_cast<std::size_t>(i)] = 1;
          for (int i = 0; i < plan.n; ++i) {
            for (int j = 0; j < plan.n; ++j) {
              if (j == i) continue;
              if (!truth_view.directed() && j < i) continue;
              if (!is_held[static_cast<std::size_t>(i)] &&
                  !is_held[static_cast<std::size_t>(j)])
                continue;
              score_dyad(truth_view, probs, tau, i, j, fv.counts, fold_scores,
                         result.views[static_cast<std::size_t>(v)].scores);
            }
          }
          result.views[static_cast<std::size_t>(v)].counts.tp += fv.counts.tp;
          result.views[static_cast<std::size_t>(v)].counts.tn += fv.counts.tn;
          result.views[static_cast<std::size_t>(v)].counts.fp += fv.counts.fp;
          result.views[static_cast<std::size_t>(v)].counts.fn += fv.counts.fn;
        } catch (const Error&) {
          fv.failed = true;
          ++result.failed_folds;
        }
        if (!fv.failed) {
          try {
            fv.auc = roc_auc(fold_scores).auc;
          } catch (const DegenerateLabels&) {
          }
        }
        result.folds.push_back(fv);
      }
    }
  }

  for (auto& vs : result.views) {
    try {
      vs.roc = roc_auc(vs.scores);
    } catch (const DegenerateLabels&) {
    }
  }
  return result;
}

}  // namespace lsjm
