#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ordembed/error.hpp"
#include "ordembed/loe.hpp"

namespace ordembed {

OrdinalProblem OrdinalProblem::from_graph(const Digraph &g, int dim,
                                          double delta) {
  require(dim >= 1, ErrorKind::kInvalidParameter, "dim must be >= 1");
  require(delta > 0.0 && std::isfinite(delta), ErrorKind::kInvalidParameter,
          "delta must be positive");
  OrdinalProblem p;
  p.n_ = g.size();
  p.dim_ = dim;
  p.delta_ = delta;
  p.anchored_ = true;
  p.graph_ = g;
  return p;
}

OrdinalProblem OrdinalProblem::from_quadruples(int n, int dim,
                                               std::vector<Quadruple> constraints,
                                               double delta) {
  require(dim >= 1, ErrorKind::kInvalidParameter, "dim must be >= 1");
  require(delta > 0.0 && std::isfinite(delta), ErrorKind::kInvalidParameter,
          "delta must be positive");
  for (const Quadruple &q : constraints)
    require(q.i >= 0 && q.j >= 0 && q.k >= 0 && q.l >= 0 && q.i < n &&
                q.j < n && q.k < n && q.l < n,
            ErrorKind::kInvalidInput, "constraint index out of range");
  OrdinalProblem p;
  p.n_ = n;
  p.dim_ = dim;
  p.delta_ = delta;
  p.anchored_ = false;
  p.graph_ = Digraph(n, std::vector<std::vector<int>>(n));
  p.quads_ = std::move(constraints);
  return p;
}

OrdinalProblem OrdinalProblem::with_delta(double delta) const {
  require(delta > 0.0 && std::isfinite(delta), ErrorKind::kInvalidParameter,
          "delta must be positive");
  OrdinalProblem p = *this;
  p.delta_ = delta;
  return p;
}

std::size_t OrdinalProblem::constraint_count() const {
  if (!anchored_)
    return quads_.size();
  std::size_t total = 0;
  for (int a = 0; a < n_; ++a) {
    const std::size_t k = graph_.out(a).size();
    total += k * (n_ - 1 - k);
  }
  return total;
}

Digraph induced_digraph(const Digraph &g, std::span<const int> vertices) {
  std::vector<int> local(g.size(), -1);
  for (std::size_t i = 0; i < vertices.size(); ++i)
    local[vertices[i]] = static_cast<int>(i);
  std::vector<std::vector<int>> out(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (int w : g.out(vertices[i]))
      if (local[w] >= 0)
        out[i].push_back(local[w]);
  return Digraph(static_cast<int>(vertices.size()), std::move(out));
}

namespace {

double pair_dist(const Eigen::MatrixXd &x, int i, int j, DistanceMode mode) {
  const double sq = (x.col(i) - x.col(j)).squaredNorm();
  return mode == DistanceMode::kSquared ? sq : std::sqrt(sq);
}

// grad += coef * d dist(i, j) / d x.
void add_dist_gradient(const Eigen::MatrixXd &x, int i, int j, double dist,
                       double coef, DistanceMode mode, Eigen::MatrixXd &grad) {
  if (coef == 0.0)
    return;
  double f;
  if (mode == DistanceMode::kSquared) {
    f = 2.0 * coef;
  } else {
    if (dist <= 0.0)
      return;
    f = coef / dist;
  }
  const Eigen::Index d = x.rows();
  const double *xi = x.data() + i * d;
  const double *xj = x.data() + j * d;
  double *gi = grad.data() + i * d;
  double *gj = grad.data() + j * d;
  for (Eigen::Index c = 0; c < d; ++c) {
    const double t = f * (xi[c] - xj[c]);
    gi[c] += t;
    gj[c] -= t;
  }
}

// Distances from x_a to every point, written into `out`.
void anchor_distances(const Eigen::MatrixXd &x, int a, DistanceMode mode,
                      std::vector<double> &out) {
  const int d = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  const double *base = x.data();
  const double *pa = base + static_cast<std::ptrdiff_t>(a) * d;
  if (d == 2) {
    const double ax = pa[0], ay = pa[1];
    for (int j = 0; j < n; ++j) {
      const double dx = base[2 * j] - ax, dy = base[2 * j + 1] - ay;
      out[j] = dx * dx + dy * dy;
    }
  } else {
    for (int j = 0; j < n; ++j) {
      const double *pj = base + static_cast<std::ptrdiff_t>(j) * d;
      double acc = 0.0;
      for (int c = 0; c < d; ++c) {
        const double t = pj[c] - pa[c];
        acc += t * t;
      }
      out[j] = acc;
    }
  }
  if (mode == DistanceMode::kPlain)
    for (int j = 0; j < n; ++j)
      out[j] = std::sqrt(out[j]);
}

double evaluate_quadruples(const Eigen::MatrixXd &x, const OrdinalProblem &p,
                           DistanceMode mode, Eigen::MatrixXd *grad) {
  double total = 0.0;
  for (const Quadruple &q : p.quadruples()) {
    const double dij = pair_dist(x, q.i, q.j, mode);
    const double dkl = pair_dist(x, q.k, q.l, mode);
    const double h = dij + p.delta() - dkl;
    if (h <= 0.0)
      continue;
    total += h * h;
    if (grad) {
      add_dist_gradient(x, q.i, q.j, dij, 2.0 * h, mode, *grad);
      add_dist_gradient(x, q.k, q.l, dkl, -2.0 * h, mode, *grad);
    }
  }
  return total;
}

// Per anchor a with thresholds t_b = D_ab + delta (b in N(a)) and candidate
// values y_c = D_ac < max t (other c cannot violate anything), the anchor's
// energy is sum_b sum_c (t_b - y_c)_+^2. When few (b, c) pairs are active the
// sum is taken term by term; otherwise with prefix sums over the sorted y,
// shifted by the mean threshold to limit cancellation.
double evaluate_anchored(const Eigen::MatrixXd &x, const OrdinalProblem &p,
                         DistanceMode mode, Eigen::MatrixXd *grad) {
  const int n = p.size();
  const double delta = p.delta();
  const Digraph &g = p.graph();
  std::vector<double> dist(n);
  std::vector<char> is_nb(n, 0);
  std::vector<std::pair<double, int>> cand; // (y_c - mu, c), sorted
  std::vector<double> s;                   // t_b - mu per neighbor, in N order
  std::vector<std::size_t> cnt;
  std::vector<double> p1, p2;
  std::vector<double> coef_c;
  std::vector<double> s_sorted, s_suffix;
  double total = 0.0;

  for (int a = 0; a < n; ++a) {
    const auto nb = g.out(a);
    if (nb.empty() || static_cast<int>(nb.size()) == n - 1)
      continue;
    anchor_distances(x, a, mode, dist);
    double tmax = -std::numeric_limits<double>::infinity();
    double mu = 0.0;
    for (int b : nb) {
      is_nb[b] = 1;
      tmax = std::max(tmax, dist[b] + delta);
      mu += dist[b] + delta;
    }
    mu /= static_cast<double>(nb.size());

    cand.clear();
    for (int c = 0; c < n; ++c)
      if (c != a && !is_nb[c] && dist[c] < tmax)
        cand.emplace_back(dist[c] - mu, c);
    for (int b : nb)
      is_nb[b] = 0;
    if (cand.empty())
      continue;
    std::sort(cand.begin(), cand.end());

    const std::size_t m = cand.size();
    s.resize(nb.size());
    cnt.resize(nb.size());
    std::size_t active = 0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      s[i] = dist[nb[i]] + delta - mu;
      // Count of y strictly below the threshold.
      cnt[i] = static_cast<std::size_t>(
          std::lower_bound(cand.begin(), cand.end(), s[i],
                           [](const std::pair<double, int> &e, double v) {
                             return e.first < v;
                           }) -
          cand.begin());
      active += cnt[i];
    }

    if (active <= 8 * (nb.size() + m)) {
      coef_c.assign(m, 0.0);
      for (std::size_t i = 0; i < nb.size(); ++i) {
        double coef_b = 0.0;
        for (std::size_t c = 0; c < cnt[i]; ++c) {
          const double h = s[i] - cand[c].first;
          total += h * h;
          coef_b += 2.0 * h;
          coef_c[c] -= 2.0 * h;
        }
        if (grad)
          add_dist_gradient(x, a, nb[i], dist[nb[i]], coef_b, mode, *grad);
      }
      if (grad)
        for (std::size_t c = 0; c < m; ++c)
          add_dist_gradient(x, a, cand[c].second, dist[cand[c].second],
                            coef_c[c], mode, *grad);
      continue;
    }

    p1.assign(m + 1, 0.0);
    p2.assign(m + 1, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
      p1[c + 1] = p1[c] + cand[c].first;
      p2[c + 1] = p2[c] + cand[c].first * cand[c].first;
    }
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const double si = s[i];
      const double k = static_cast<double>(cnt[i]);
      const double e = k * si * si - 2.0 * si * p1[cnt[i]] + p2[cnt[i]];
      total += std::max(0.0, e);
      if (grad)
        add_dist_gradient(x, a, nb[i], dist[nb[i]],
                          2.0 * (k * si - p1[cnt[i]]), mode, *grad);
    }
    if (!grad)
      continue;
    s_sorted.assign(s.begin(), s.end());
    std::sort(s_sorted.begin(), s_sorted.end());
    const std::size_t nbs = s_sorted.size();
    s_suffix.assign(nbs + 1, 0.0);
    for (std::size_t i = nbs; i-- > 0;)
      s_suffix[i] = s_suffix[i + 1] + s_sorted[i];
    for (std::size_t c = 0; c < m; ++c) {
      const double z = cand[c].first;
      const std::size_t first =
          std::upper_bound(s_sorted.begin(), s_sorted.end(), z) -
          s_sorted.begin();
      const double above = static_cast<double>(nbs - first);
      add_dist_gradient(x, a, cand[c].second, dist[cand[c].second],
                        -2.0 * (s_suffix[first] - above * z), mode, *grad);
    }
  }
  return total;
}

void check_shape(const Eigen::MatrixXd &x, const OrdinalProblem &p) {
  require(x.rows() == p.dim() && x.cols() == p.size(),
          ErrorKind::kInvalidInput,
          "embedding shape does not match the ordinal problem");
}

} // namespace

double loe_evaluate(const Eigen::MatrixXd &x, const OrdinalProblem &p,
                    DistanceMode mode, Eigen::MatrixXd *grad) {
  check_shape(x, p);
  if (grad)
    grad->setZero(x.rows(), x.cols());
  return p.anchored() ? evaluate_anchored(x, p, mode, grad)
                      : evaluate_quadruples(x, p, mode, grad);
}

double loe_energy(const Eigen::MatrixXd &x, const OrdinalProblem &p,
                  DistanceMode mode) {
  return loe_evaluate(x, p, mode, nullptr);
}

Eigen::MatrixXd loe_gradient(const Eigen::MatrixXd &x, const OrdinalProblem &p,
                             DistanceMode mode) {
  Eigen::MatrixXd g;
  loe_evaluate(x, p, mode, &g);
  return g;
}

} // namespace ordembed
