#pragma once

// Test-only straight-line transcription of the model equations, deliberately
// independent of the library: long-double arithmetic, its own tiny dense
// matrix helpers, no Eigen, no shared code. Unit and acceptance tests compare
// the production kernels and update steps against these.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

using ld = long double;
using Vec = std::vector<ld>;
using Mat = std::vector<Vec>;

inline Mat identity(int d) {
  Mat m(static_cast<std::size_t>(d), Vec(static_cast<std::size_t>(d), 0.0L));
  for (int i = 0; i < d; ++i) m[i][i] = 1.0L;
  return m;
}

inline Mat zeros(int r, int c) {
  return Mat(static_cast<std::size_t>(r), Vec(static_cast<std::size_t>(c), 0.0L));
}

inline Mat mul(const Mat& a, const Mat& b) {
  const int r = static_cast<int>(a.size());
  const int k = static_cast<int>(b.size());
  const int c = static_cast<int>(b[0].size());
  Mat out = zeros(r, c);
  for (int i = 0; i < r; ++i)
    for (int t = 0; t < k; ++t)
      for (int j = 0; j < c; ++j) out[i][j] += a[i][t] * b[t][j];
  return out;
}

inline Vec mulv(const Mat& a, const Vec& v) {
  const int r = static_cast<int>(a.size());
  const int c = static_cast<int>(v.size());
  Vec out(static_cast<std::size_t>(r), 0.0L);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[i] += a[i][j] * v[j];
  return out;
}

// Gauss-Jordan with partial pivoting.
inline Mat inverse(Mat a) {
  const int d = static_cast<int>(a.size());
  Mat inv = identity(d);
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::fabs(static_cast<double>(a[r][col])) >
          std::fabs(static_cast<double>(a[piv][col])))
        piv = r;
    if (a[piv][col] == 0.0L) throw std::runtime_error("oracle: singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const ld scale = a[col][col];
    for (int j = 0; j < d; ++j) {
      a[col][j] /= scale;
      inv[col][j] /= scale;
    }
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      const ld f = a[r][col];
      if (f == 0.0L) continue;
      for (int j = 0; j < d; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

inline ld det(const Mat& m) {
  Mat a = m;
  const int d = static_cast<int>(a.size());
  ld result = 1.0L;
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::fabs(static_cast<double>(a[r][col])) >
          std::fabs(static_cast<double>(a[piv][col])))
        piv = r;
    if (a[piv][col] == 0.0L) return 0.0L;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      result = -result;
    }
    result *= a[col][col];
    for (int r = col + 1; r < d; ++r) {
      const ld f = a[r][col] / a[col][col];
      for (int j = col; j < d; ++j) a[r][j] -= f * a[col][j];
    }
  }
  return result;
}

// One view's data: 0/1 adjacency and 0/1 observation mask, diagonal excluded.
struct Data {
  int n = 0;
  std::vector<std::vector<int>> y;
  std::vector<std::vector<int>> obs;

  int w(int i, int j) const { return obs[i][j] + obs[j][i]; }
  ld link_count() const {
    ld c = 0.0L;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (j != i && obs[i][j]) c += y[i][j];
    return c;
  }
  ld degree(int i) const {
    ld d = 0.0L;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (obs[i][j]) d += y[i][j];
      if (obs[j][i]) d += y[j][i];
    }
    return d;
  }
};

struct Params {
  std::vector<Vec> pos;  // N x D expansion-point rows
  Mat cov;               // D x D
  ld xi = 0.0L;
  ld psi2 = 2.0L;
};

inline int dim(const Params& p) { return static_cast<int>(p.cov.size()); }

// log of exp(xi + psi2/2) det(B)^{-1/2} exp(-diff' B^{-1} diff), B = I + 4 cov.
inline ld log_m(const Params& p, const Vec& zi, const Vec& zj) {
  const int d = dim(p);
  Mat b = identity(d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) b[r][c] += 4.0L * p.cov[r][c];
  const Mat binv = inverse(b);
  Vec diff(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) diff[k] = zi[k] - zj[k];
  const Vec u = mulv(binv, diff);
  ld quad = 0.0L;
  for (int k = 0; k < d; ++k) quad += diff[k] * u[k];
  return p.xi + 0.5L * p.psi2 - 0.5L * std::log(det(b)) - quad;
}

inline ld softplus(ld x) { return x > 40.0L ? x : std::log1p(std::exp(x)); }
inline ld logistic(ld x) {
  return x >= 0.0L ? 1.0L / (1.0L + std::exp(-x)) : std::exp(x) / (1.0L + std::exp(x));
}

// --- The f targets the Taylor machinery expands (masked ordered sums). ---

// Position target for node i: sum_j (w_ij / 2) log(1 + m(z, z_j)).
inline ld f_position(const Data& data, const Params& p, int node, const Vec& z) {
  ld acc = 0.0L;
  for (int j = 0; j < data.n; ++j) {
    if (j == node) continue;
    const int w = data.w(node, j);
    if (w == 0) continue;
    acc += 0.5L * w * softplus(log_m(p, z, p.pos[static_cast<std::size_t>(j)]));
  }
  return acc;
}

// Covariance target: sum over observed ordered dyads of log(1 + m_ij).
inline ld f_sigma(const Data& data, const Params& base, const Mat& cov) {
  Params p = base;
  p.cov = cov;
  ld acc = 0.0L;
  for (int i = 0; i < data.n; ++i)
    for (int j = 0; j < data.n; ++j) {
      if (j == i || !data.obs[i][j]) continue;
      acc += softplus(log_m(p, base.pos[static_cast<std::size_t>(i)],
                            base.pos[static_cast<std::size_t>(j)]));
    }
  return acc;
}

inline ld f_xi(const Data& data, const Params& base, ld xi) {
  Params p = base;
  p.xi = xi;
  ld acc = 0.0L;
  for (int i = 0; i < data.n; ++i)
    for (int j = 0; j < data.n; ++j) {
      if (j == i || !data.obs[i][j]) continue;
      acc += softplus(log_m(p, base.pos[static_cast<std::size_t>(i)],
                            base.pos[static_cast<std::size_t>(j)]));
    }
  return acc;
}

inline ld f_psi2(const Data& data, const Params& base, ld psi2) {
  Params p = base;
  p.psi2 = psi2;
  ld acc = 0.0L;
  for (int i = 0; i < data.n; ++i)
    for (int j = 0; j < data.n; ++j) {
      if (j == i || !data.obs[i][j]) continue;
      acc += softplus(log_m(p, base.pos[static_cast<std::size_t>(i)],
                            base.pos[static_cast<std::size_t>(j)]));
    }
  return acc;
}

// Jensen-bounded expected log-likelihood.
inline ld surrogate(const Data& data, const Params& p) {
  ld trace = 0.0L;
  for (int k = 0; k < dim(p); ++k) trace += p.cov[k][k];
  ld acc = 0.0L;
  for (int i = 0; i < data.n; ++i)
    for (int j = 0; j < data.n; ++j) {
      if (j == i || !data.obs[i][j]) continue;
      const Vec& zi = p.pos[static_cast<std::size_t>(i)];
      const Vec& zj = p.pos[static_cast<std::size_t>(j)];
      ld sq = 0.0L;
      for (int k = 0; k < dim(p); ++k) sq += (zi[k] - zj[k]) * (zi[k] - zj[k]);
      if (data.y[i][j]) acc += p.xi - 2.0L * trace - sq;
      acc -= softplus(log_m(p, zi, zj));
    }
  return acc;
}

// --- Closed forms (transcribed afresh from their definitions). ---

inline void grad_hess(const Data& data, const Params& p, int node, Vec& grad, Mat& hess) {
  const int d = dim(p);
  Mat b = identity(d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) b[r][c] += 4.0L * p.cov[r][c];
  const Mat binv = inverse(b);

  grad.assign(static_cast<std::size_t>(d), 0.0L);
  hess = zeros(d, d);
  for (int j = 0; j < data.n; ++j) {
    if (j == node) continue;
    const int w = data.w(node, j);
    if (w == 0) continue;
    Vec diff(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k)
      diff[k] = p.pos[static_cast<std::size_t>(node)][k] -
                p.pos[static_cast<std::size_t>(j)][k];
    const Vec u = mulv(binv, diff);
    ld quad = 0.0L;
    for (int k = 0; k < d; ++k) quad += diff[k] * u[k];
    const ld lm = p.xi + 0.5L * p.psi2 - 0.5L * std::log(det(b)) - quad;
    const ld prob = logistic(lm);
    const ld hw = 0.5L * w;
    for (int r = 0; r < d; ++r) {
      grad[r] += hw * (-2.0L) * prob * u[r];
      for (int c = 0; c < d; ++c) {
        hess[r][c] += hw * (-2.0L) * prob * binv[r][c];
        hess[r][c] += hw * 4.0L * prob * (1.0L - prob) * u[r] * u[c];
      }
    }
  }
}

inline Mat sigma_jacobian(const Data& data, const Params& p) {
  const int d = dim(p);
  Mat b = identity(d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) b[r][c] += 4.0L * p.cov[r][c];
  const Mat binv = inverse(b);
  Mat jac = zeros(d, d);
  for (int i = 0; i < data.n; ++i)
    for (int j = 0; j < data.n; ++j) {
      if (j == i || !data.obs[i][j]) continue;
      Vec diff(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k)
        diff[k] =
            p.pos[static_cast<std::size_t>(i)][k] - p.pos[static_cast<std::size_t>(j)][k];
      const Vec u = mulv(binv, diff);
      ld quad = 0.0L;
      for (int k = 0; k < d; ++k) quad += diff[k] * u[k];
      const ld prob = logistic(p.xi + 0.5L * p.psi2 - 0.5L * std::log(det(b)) - quad);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
          jac[r][c] += prob * (4.0L * u[r] * u[c] - 2.0L * binv[r][c]);
    }
  return jac;
}

inline void xi_derivatives(const Data& data, const Params& p, ld& first, ld& second) {
  first = 0.0L;
  second = 0.0L;
  for (int i = 0; i < data.n; ++i)
    for (int j = 0; j < data.n; ++j) {
      if (j == i || !data.obs[i][j]) continue;
      const ld lm = log_m(p, p.pos[static_cast<std::size_t>(i)],
                          p.pos[static_cast<std::size_t>(j)]);
      const ld prob = logistic(lm);
      first += prob;
      second += prob * (1.0L - prob);
    }
}

inline ld psi2_derivative(const Data& data, const Params& p) {
  ld acc = 0.0L;
  for (int i = 0; i < data.n; ++i)
    for (int j = 0; j < data.n; ++j) {
      if (j == i || !data.obs[i][j]) continue;
      acc += 0.5L * logistic(log_m(p, p.pos[static_cast<std::size_t>(i)],
                                   p.pos[static_cast<std::size_t>(j)]));
    }
  return acc;
}

// --- Update steps, sequenced exactly as documented. ---

// Covariance update expanded at `anchor`.
inline Mat estep_cov(const Data& data, const Params& anchor, ld sigma2) {
  const int d = dim(anchor);
  const Mat jac = sigma_jacobian(data, anchor);
  const ld scale =
      static_cast<ld>(data.n) / (2.0L * sigma2) + 2.0L * data.link_count();
  Mat bracket = jac;
  for (int k = 0; k < d; ++k) bracket[k][k] += scale;
  Mat cov = inverse(bracket);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) cov[r][c] *= 0.5L * static_cast<ld>(data.n);
  // Symmetrize like the production path.
  for (int r = 0; r < d; ++r)
    for (int c = r + 1; c < d; ++c) {
      const ld m = 0.5L * (cov[r][c] + cov[c][r]);
      cov[r][c] = m;
      cov[c][r] = m;
    }
  return cov;
}

// Position sweep anchored at `anchor.pos` with curvature from `cov_new`.
inline std::vector<Vec> estep_positions(const Data& data, const Params& anchor,
                                        const Mat& cov_new, ld sigma2) {
  const int d = dim(anchor);
  Params curved = anchor;
  curved.cov = cov_new;
  std::vector<Vec> out(static_cast<std::size_t>(data.n));
  for (int i = 0; i < data.n; ++i) {
    Vec grad;
    Mat hess;
    grad_hess(data, curved, i, grad, hess);
    Mat bracket = hess;
    const ld deg = data.degree(i);
    for (int k = 0; k < d; ++k) bracket[k][k] += 1.0L / (2.0L * sigma2) + deg;
    Vec rhs(static_cast<std::size_t>(d), 0.0L);
    for (int j = 0; j < data.n; ++j) {
      if (j == i) continue;
      ld wy = 0.0L;
      if (data.obs[i][j]) wy += data.y[i][j];
      if (data.obs[j][i]) wy += data.y[j][i];
      if (wy == 0.0L) continue;
      for (int k = 0; k < d; ++k) rhs[k] += wy * anchor.pos[static_cast<std::size_t>(j)][k];
    }
    const Vec hz = mulv(hess, anchor.pos[static_cast<std::size_t>(i)]);
    for (int k = 0; k < d; ++k) rhs[k] += hz[k] - grad[k];
    out[static_cast<std::size_t>(i)] = mulv(inverse(bracket), rhs);
  }
  return out;
}

struct MstepOut {
  ld xi;
  ld psi2;
};

// Intercept updates anchored at the post-E-step positions/cov.
inline MstepOut mstep(const Data& data, const Params& post_estep, ld prior_xi,
                      ld prior_psi2) {
  ld f1, f2;
  xi_derivatives(data, post_estep, f1, f2);
  MstepOut out;
  out.xi = (prior_xi + prior_psi2 * (data.link_count() - f1 + post_estep.xi * f2)) /
           (1.0L + prior_psi2 * f2);
  Params with_new_xi = post_estep;
  with_new_xi.xi = out.xi;
  const ld fp = psi2_derivative(data, with_new_xi);
  out.psi2 = 1.0L / (1.0L / prior_psi2 + 2.0L * fp);
  return out;
}

}  // namespace oracle
