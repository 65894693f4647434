#include "lsjm/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

#include "lsjm/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lsjm::kernels {

void apply_thread_cap_from_env() {
#ifdef _OPENMP
  if (const char* cap = std::getenv("LSJM_THREADS")) {
    const int t = std::atoi(cap);
    if (t > 0) omp_set_num_threads(t);
  }
#endif
}

double softplus(double x) {
  if (x > 35.0) return x;
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

PairContext PairContext::make(const Eigen::MatrixXd& cov, double xi_tilde,
                              double psi2_tilde) {
  const int d = static_cast<int>(cov.rows());
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(d, d) + 4.0 * cov;
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success)
    throw SingularMatrix("I + 4*cov is not positive definite");
  double logdet = 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  for (int k = 0; k < d; ++k) {
    if (!(l(k, k) > 0.0) || !std::isfinite(l(k, k)))
      throw SingularMatrix("I + 4*cov is numerically singular");
    logdet += 2.0 * std::log(l(k, k));
  }
  PairContext ctx;
  ctx.b_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  ctx.log_gain = xi_tilde + 0.5 * psi2_tilde - 0.5 * logdet;
  ctx.dim = d;
  return ctx;
}

namespace {

// Runs fn(i) for every row, serially or under OpenMP. Row results must be
// independent; callers combine them in ascending i afterwards.
template <class Fn>
void for_each_row(int n, Exec exec, Fn&& fn) {
#ifdef _OPENMP
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#else
  (void)exec;
#endif
  for (int i = 0; i < n; ++i) fn(i);
}

// The latent dimension is two in every published use, so the dyad loops carry
// a scalar fast path; other dimensions fall back to small Eigen products.
struct QuadForm {
  const Eigen::MatrixXd& b_inv;
  const Eigen::MatrixXd& pos;
  int dim;
  double b00 = 0.0, b01 = 0.0, b11 = 0.0;

  QuadForm(const PairContext& ctx, const Eigen::MatrixXd& positions)
      : b_inv(ctx.b_inv), pos(positions), dim(ctx.dim) {
    if (dim == 2) {
      b00 = b_inv(0, 0);
      b01 = b_inv(0, 1);
      b11 = b_inv(1, 1);
    }
  }

  // diff, u = B^-1 diff, diff'u and diff'diff for the dyad (i, j).
  struct Terms {
    double quad = 0.0;    // diff' B^-1 diff
    double sqdist = 0.0;  // diff' diff
  };

  Terms operator()(int i, int j, double* diff, double* u) const {
    Terms t;
    if (dim == 2) {
      const double dx = pos(i, 0) - pos(j, 0);
      const double dy = pos(i, 1) - pos(j, 1);
      diff[0] = dx;
      diff[1] = dy;
      u[0] = b00 * dx + b01 * dy;
      u[1] = b01 * dx + b11 * dy;
      t.quad = dx * u[0] + dy * u[1];
      t.sqdist = dx * dx + dy * dy;
      return t;
    }
    for (int a = 0; a < dim; ++a) diff[a] = pos(i, a) - pos(j, a);
    for (int a = 0; a < dim; ++a) {
      double acc = 0.0;
      for (int b = 0; b < dim; ++b) acc += b_inv(a, b) * diff[b];
      u[a] = acc;
      t.quad += diff[a] * acc;
      t.sqdist += diff[a] * diff[a];
    }
    return t;
  }
};

constexpr int kMaxStackDim = 8;

}  // namespace

double surrogate(const AdjacencyView& view, const SweepParams& p, Exec exec) {
  const int n = view.n();
  const PairContext ctx = PairContext::make(p.cov, p.xi_tilde, p.psi2_tilde);
  const QuadForm quad(ctx, p.positions);
  const double trace2 = 2.0 * p.cov.trace();
  std::vector<double> row(n, 0.0);

  for_each_row(n, exec, [&](int i) {
    double diff[kMaxStackDim], u[kMaxStackDim];
    std::vector<double> heap;
    double* db = diff;
    double* ub = u;
    if (ctx.dim > kMaxStackDim) {
      heap.resize(2 * static_cast<std::size_t>(ctx.dim));
      db = heap.data();
      ub = heap.data() + ctx.dim;
    }
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || !view.observed(i, j)) continue;
      const auto t = quad(i, j, db, ub);
      if (view.y(i, j)) acc += p.xi_tilde - trace2 - t.sqdist;
      acc -= softplus(ctx.log_gain - t.quad);
    }
    row[static_cast<std::size_t>(i)] = acc;
  });

  double total = 0.0;
  for (int i = 0; i < n; ++i) total += row[static_cast<std::size_t>(i)];
  return total;
}

Eigen::MatrixXd sigma_jacobian(const AdjacencyView& view, const SweepParams& p, Exec exec) {
  const int n = view.n();
  const PairContext ctx = PairContext::make(p.cov, p.xi_tilde, p.psi2_tilde);
  const QuadForm quad(ctx, p.positions);
  const int d = ctx.dim;
  std::vector<Eigen::MatrixXd> row(static_cast<std::size_t>(n));

  for_each_row(n, exec, [&](int i) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    double diff[kMaxStackDim], u[kMaxStackDim];
    std::vector<double> heap;
    double* db = diff;
    double* ub = u;
    if (d > kMaxStackDim) {
      heap.resize(2 * static_cast<std::size_t>(d));
      db = heap.data();
      ub = heap.data() + d;
    }
    double psum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || !view.observed(i, j)) continue;
      const auto t = quad(i, j, db, ub);
      const double prob = sigmoid(ctx.log_gain - t.quad);
      psum += prob;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) acc(a, b) += (4.0 * prob) * ub[a] * ub[b];
    }
    acc.noalias() += (-2.0 * psum) * ctx.b_inv;
    row[static_cast<std::size_t>(i)] = std::move(acc);
  });

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) total += row[static_cast<std::size_t>(i)];
  return total;
}

XiDerivatives xi_derivatives(const AdjacencyView& view, const SweepParams& p, Exec exec) {
  const int n = view.n();
  const PairContext ctx = PairContext::make(p.cov, p.xi_tilde, p.psi2_tilde);
  const QuadForm quad(ctx, p.positions);
  std::vector<double> row1(n, 0.0), row2(n, 0.0);

  for_each_row(n, exec, [&](int i) {
    double diff[kMaxStackDim], u[kMaxStackDim];
    std::vector<double> heap;
    double* db = diff;
    double* ub = u;
    if (ctx.dim > kMaxStackDim) {
      heap.resize(2 * static_cast<std::size_t>(ctx.dim));
      db = heap.data();
      ub = heap.data() + ctx.dim;
    }
    double f1 = 0.0, f2 = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || !view.observed(i, j)) continue;
      const auto t = quad(i, j, db, ub);
      const double lo = ctx.log_gain - t.quad;
      const double prob = sigmoid(lo);
      f1 += prob;
      f2 += prob * sigmoid(-lo);
    }
    row1[static_cast<std::size_t>(i)] = f1;
    row2[static_cast<std::size_t>(i)] = f2;
  });

  XiDerivatives out;
  for (int i = 0; i < n; ++i) {
    out.first += row1[static_cast<std::size_t>(i)];
    out.second += row2[static_cast<std::size_t>(i)];
  }
  return out;
}

double psi2_derivative(const AdjacencyView& view, const SweepParams& p, Exec exec) {
  const int n = view.n();
  const PairContext ctx = PairContext::make(p.cov, p.xi_tilde, p.psi2_tilde);
  const QuadForm quad(ctx, p.positions);
  std::vector<double> row(n, 0.0);

  for_each_row(n, exec, [&](int i) {
    double diff[kMaxStackDim], u[kMaxStackDim];
    std::vector<double> heap;
    double* db = diff;
    double* ub = u;
    if (ctx.dim > kMaxStackDim) {
      heap.resize(2 * static_cast<std::size_t>(ctx.dim));
      db = heap.data();
      ub = heap.data() + ctx.dim;
    }
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || !view.observed(i, j)) continue;
      const auto t = quad(i, j, db, ub);
      acc += 0.5 * sigmoid(ctx.log_gain - t.quad);
    }
    row[static_cast<std::size_t>(i)] = acc;
  });

  double total = 0.0;
  for (int i = 0; i < n; ++i) total += row[static_cast<std::size_t>(i)];
  return total;
}

void node_grad_hess(const AdjacencyView& view, const SweepParams& p, int node,
                    Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  const PairContext ctx = PairContext::make(p.cov, p.xi_tilde, p.psi2_tilde);
  node_grad_hess(view, ctx, p.positions, node, grad, hess);
}

void node_grad_hess(const AdjacencyView& view, const PairContext& ctx,
                    const Eigen::MatrixXd& positions, int node, Eigen::VectorXd& grad,
                    Eigen::MatrixXd& hess) {
  const int n = view.n();
  const int d = ctx.dim;
  const QuadForm quad(ctx, positions);
  grad = Eigen::VectorXd::Zero(d);
  hess = Eigen::MatrixXd::Zero(d, d);
  double diff[kMaxStackDim], u[kMaxStackDim];
  std::vector<double> heap;
  double* db = diff;
  double* ub = u;
  if (d > kMaxStackDim) {
    heap.resize(2 * static_cast<std::size_t>(d));
    db = heap.data();
    ub = heap.data() + d;
  }
  double wsum = 0.0;  // accumulated (w/2) p for the shared -2 p B^-1 term
  for (int j = 0; j < n; ++j) {
    if (j == node) continue;
    const int w = (view.observed(node, j) ? 1 : 0) + (view.observed(j, node) ? 1 : 0);
    if (w == 0) continue;
    const auto t = quad(node, j, db, ub);
    const double lo = ctx.log_gain - t.quad;
    const double prob = sigmoid(lo);
    const double half_w = 0.5 * w;
    const double gscale = -2.0 * half_w * prob;
    const double hscale = 4.0 * half_w * prob * sigmoid(-lo);
    wsum += half_w * prob;
    for (int a = 0; a < d; ++a) {
      grad(a) += gscale * ub[a];
      for (int b = 0; b < d; ++b) hess(a, b) += hscale * ub[a] * ub[b];
    }
  }
  hess.noalias() += (-2.0 * wsum) * ctx.b_inv;
}

}  // namespace lsjm::kernels
