#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "lsjm/lsjm.hpp"
#include "lsjm/network.hpp"

namespace lsjm {

// Posterior-mean link probability: logistic(xi_tilde - |zi - zj|^2).
double link_probability(const Eigen::VectorXd& zi, const Eigen::VectorXd& zj,
                        double xi_tilde);

enum class PositionSource { PerView, Fused };

// Dense probability matrix for one view. Off-diagonal entries lie in (0,1);
// the diagonal carries 0 and is excluded from every consumer.
struct LinkProbabilityMatrix {
  int view = 0;
  PositionSource source = PositionSource::PerView;
  Eigen::MatrixXd probs;
};

LinkProbabilityMatrix link_probability_matrix(const Eigen::MatrixXd& positions,
                                              double xi_tilde, int view,
                                              PositionSource source);

// Classification threshold: the median predicted probability over the dyads
// that actually carry an observed link in this view. Throws NoObservedLinks.
double threshold_tau(const AdjacencyView& view, const Eigen::MatrixXd& probs);

struct ScoredLabel {
  double score = 0.0;
  int label = 0;  // 0 or 1
};

struct RocResult {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) .. (1,1)
  double auc = 0.5;
};

// ROC by sweeping the distinct scores; AUC equals the Mann-Whitney statistic
// (ties contribute one half). Throws DegenerateLabels when only one class is
// present.
RocResult roc_auc(const std::vector<ScoredLabel>& scores);

// Scores of one view's observed dyads against their true labels, ordered dyads
// for directed views and pairs counted once for undirected ones.
std::vector<ScoredLabel> insample_scores(const AdjacencyView& view,
                                         const Eigen::MatrixXd& probs);

enum class CvMode { Dyads, Nodes };
enum class Estimator { SingleLsmPerView, Lsjm };

// Fold assignment over the multiplex's item space: every ordered dyad when any
// view is directed, every unordered pair when all are undirected, or every node
// in node mode. A deterministic function of (seed, N, folds).
struct CvPlan {
  CvMode mode = CvMode::Dyads;
  int folds = 10;
  std::uint64_t seed = 1;
  int n = 0;
  bool ordered_dyads = true;    // dyad mode: ordered items vs unordered pairs
  std::vector<int> assignment;  // item index -> fold

  long item_count() const { return static_cast<long>(assignment.size()); }
};

CvPlan make_cv_plan(const MultiplexNetwork& net, CvMode mode, int folds,
                    std::uint64_t seed);

struct CvCounts {
  long tp = 0, tn = 0, fp = 0, fn = 0;

  long held_out() const { return tp + tn + fp + fn; }
  double misclassification() const {
    const long h = held_out();
    return h > 0 ? static_cast<double>(fp + fn) / static_cast<double>(h) : 0.0;
  }
};

struct CvFoldView {
  int fold = 0;
  int view = 0;
  bool failed = false;
  CvCounts counts;
  std::optional<double> auc;  // absent when the fold's truth is one-class
};

struct CvViewSummary {
  int view = 0;
  CvCounts counts;                  // summed over folds
  std::optional<RocResult> roc;     // pooled scores across folds
  std::vector<ScoredLabel> scores;  // pooled (score, truth) pairs
};

struct CvResult {
  CvPlan plan;
  Estimator estimator = Estimator::Lsjm;
  std::vector<CvFoldView> folds;
  std::vector<CvViewSummary> views;
  int failed_folds = 0;
};

// K-fold link prediction: per fold, hide the fold's items, refit, score the
// hidden dyads, classify at each view's training-link median. Dyad mode hides
// the fold's dyads in every view at once; node mode hides every dyad touching
// the fold's nodes in one view at a time and needs the joint estimator. A fold
// whose refit throws is marked failed and the run continues.
CvResult run_cv(const MultiplexNetwork& net, const std::vector<PriorConfig>& priors,
                const FitConfig& fit_config, const CvPlan& plan, Estimator estimator);

}  // namespace lsjm
