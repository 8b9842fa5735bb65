#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "ordembed/error.hpp"
#include "ordembed/loe.hpp"
#include "ordembed/seeding.hpp"

namespace ordembed {

namespace {

using Vec = Eigen::VectorXd;

struct Objective {
  const OrdinalProblem &p;
  DistanceMode mode;
  int evaluations = 0;

  double operator()(const Vec &v, Vec *g) {
    ++evaluations;
    Eigen::Map<const Eigen::MatrixXd> x(v.data(), p.dim(), p.size());
    if (!g)
      return loe_evaluate(x, p, mode, nullptr);
    Eigen::MatrixXd gm;
    const double f = loe_evaluate(x, p, mode, &gm);
    *g = Eigen::Map<const Vec>(gm.data(), gm.size());
    return f;
  }
};

// Backtracking Armijo search along `dir` starting from `step`. Returns the
// accepted step or 0 when the step underflows.
double armijo(Objective &obj, const Vec &x, double f, const Vec &g,
              const Vec &dir, double step, Vec &x_new, double &f_new) {
  const double slope = g.dot(dir);
  if (!(slope < 0.0))
    return 0.0;
  const double xs = std::max(1.0, x.norm());
  for (int halvings = 0; halvings < 60; ++halvings) {
    x_new = x + step * dir;
    f_new = obj(x_new, nullptr);
    if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope)
      return step;
    step *= 0.5;
    if (step * dir.norm() < 1e-15 * xs)
      break;
  }
  return 0.0;
}

// Length of the very first trial step: a tenth of the iterate's norm.
double first_step(const Vec &x, const Vec &g) {
  const double gn = g.norm();
  const double xn = x.norm();
  return gn > 0.0 ? (xn > 0.0 ? 0.1 * xn / gn : 1.0 / gn) : 0.0;
}

void run_bfgs(Objective &obj, Vec &x, double &f, Vec &g, const LoeConfig &cfg,
              LoeResult &res, double g_stop) {
  const Eigen::Index m = x.size();
  const bool dense = m <= cfg.dense_bfgs_limit;
  Eigen::MatrixXd h;
  bool h_scaled = false; // false: H is (implicitly) the identity
  std::deque<std::pair<Vec, Vec>> history; // limited-memory (s, y) pairs
  Vec x_new, g_new;
  double f_new = 0.0;

  auto direction = [&]() -> Vec {
    if (!h_scaled)
      return -g;
    if (dense)
      return -(h.selfadjointView<Eigen::Lower>() * g);
    // Two-loop recursion.
    Vec q = g;
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      const auto &[s, y] = history[i];
      alpha[i] = s.dot(q) / y.dot(s);
      q -= alpha[i] * y;
    }
    const auto &[sl, yl] = history.back();
    q *= sl.dot(yl) / yl.dot(yl);
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto &[s, y] = history[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (alpha[i] - beta) * s;
    }
    return -q;
  };
  auto reset = [&] {
    h_scaled = false;
    history.clear();
  };

  while (res.iterations < cfg.max_iters) {
    if (f == 0.0 || g.norm() <= g_stop) {
      res.converged = true;
      return;
    }
    Vec dir = direction();
    double step = h_scaled ? 1.0 : first_step(x, g);
    double accepted = armijo(obj, x, f, g, dir, step, x_new, f_new);
    if (accepted == 0.0 && h_scaled) {
      reset();
      dir = -g;
      accepted = armijo(obj, x, f, g, dir, first_step(x, g), x_new, f_new);
    }
    if (accepted == 0.0) {
      res.line_search_failed = true;
      return;
    }
    obj(x_new, &g_new);
    const Vec s = x_new - x;
    const Vec y = g_new - g;
    const double sy = s.dot(y);
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    ++res.iterations;
    res.energy_trace.push_back(f);

    if (!(sy > 1e-12 * s.norm() * y.norm())) {
      reset(); // curvature condition failed
      continue;
    }
    if (dense) {
      if (!h_scaled) {
        h = (sy / y.squaredNorm()) * Eigen::MatrixXd::Identity(m, m);
        h_scaled = true;
      }
      // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T, lower triangle.
      const double rho = 1.0 / sy;
      const Vec hy = h.selfadjointView<Eigen::Lower>() * y;
      const double yhy = y.dot(hy);
      h.selfadjointView<Eigen::Lower>().rankUpdate(s, hy, -rho);
      h.selfadjointView<Eigen::Lower>().rankUpdate(s, rho * rho * yhy + rho);
    } else {
      history.emplace_back(s, y);
      if (static_cast<int>(history.size()) > cfg.lbfgs_memory)
        history.pop_front();
      h_scaled = true;
    }
  }
}

// Majorization-minimization: each iteration minimizes the quadratic upper
// bound f(x) + g.(z - x) + (L/2)|z - x|^2, whose minimizer is x - g / L; L is
// doubled until the bound holds at the new point, so f never increases.
void run_mm(Objective &obj, Vec &x, double &f, Vec &g, const LoeConfig &cfg,
            LoeResult &res, double g_stop) {
  const double xn = std::max(x.norm(), 1e-300);
  double lip = g.norm() / (0.1 * xn);
  Vec x_new;
  while (res.iterations < cfg.max_iters) {
    if (f == 0.0 || g.norm() <= g_stop) {
      res.converged = true;
      return;
    }
    const double gg = g.squaredNorm();
    bool ok = false;
    double f_new = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      x_new = x - g / lip;
      f_new = obj(x_new, nullptr);
      // Majorizer value at its minimizer: f - |g|^2 / (2L).
      if (std::isfinite(f_new) && f_new <= f - 0.5 * gg / lip) {
        ok = true;
        break;
      }
      lip *= 2.0;
    }
    if (!ok) {
      res.line_search_failed = true;
      return;
    }
    x.swap(x_new);
    f = obj(x, &g);
    ++res.iterations;
    res.energy_trace.push_back(f);
    lip *= 0.5;
  }
}

} // namespace

Eigen::MatrixXd loe_random_init(int n, int dim, double unit,
                                std::uint64_t seed, double scale) {
  std::mt19937_64 rng(derive_seed(seed, {0x6c6fu}));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(dim, n);
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < dim; ++a)
      x(a, j) = normal(rng);
  // |z - z'| for independent standard normals is sqrt(2) * chi_d, whose mean
  // is 2 Gamma((d+1)/2) / Gamma(d/2).
  const double mean_dist =
      2.0 * std::exp(std::lgamma(0.5 * (dim + 1)) - std::lgamma(0.5 * dim));
  x *= scale * unit *
       std::pow(static_cast<double>(n), 1.0 / dim) / mean_dist;
  return x;
}

LoeResult loe_embed(const OrdinalProblem &p, const LoeConfig &cfg) {
  require(cfg.max_iters >= 0, ErrorKind::kInvalidParameter,
          "max_iters must be >= 0");
  require(cfg.grad_tol > 0.0, ErrorKind::kInvalidParameter,
          "gradient tolerance must be positive");
  Eigen::MatrixXd x0;
  if (cfg.init == LoeInit::kGiven) {
    require(cfg.initial.has_value(), ErrorKind::kInvalidParameter,
            "given initialization requested without a starting point");
    x0 = *cfg.initial;
    require(x0.rows() == p.dim() && x0.cols() == p.size(),
            ErrorKind::kInvalidInput, "initial embedding has the wrong shape");
    require(x0.allFinite(), ErrorKind::kInvalidInput,
            "initial embedding is not finite");
  } else {
    require(cfg.init_scale > 0.0, ErrorKind::kInvalidParameter,
            "init_scale must be positive");
    // Length carried by the margin: sqrt(delta) on squared distances.
    const double unit =
        cfg.mode == DistanceMode::kSquared ? std::sqrt(p.delta()) : p.delta();
    x0 = loe_random_init(p.size(), p.dim(), unit, cfg.seed, cfg.init_scale);
  }

  Objective obj{p, cfg.mode};
  Vec x = Eigen::Map<const Vec>(x0.data(), x0.size());
  Vec g;
  double f = obj(x, &g);
  LoeResult res;
  res.initial_energy = f;
  const double g_stop = cfg.grad_tol * g.norm();
  if (cfg.method == LoeMethod::kBfgs)
    run_bfgs(obj, x, f, g, cfg, res, g_stop);
  else
    run_mm(obj, x, f, g, cfg, res, g_stop);
  res.x = Eigen::Map<const Eigen::MatrixXd>(x.data(), p.dim(), p.size());
  res.energy = f;
  res.evaluations = obj.evaluations;
  return res;
}

} // namespace ordembed
