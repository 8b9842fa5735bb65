#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ordembed/error.hpp"
#include "ordembed/lp_embed.hpp"

namespace ordembed {

namespace {

using Sparse = Eigen::SparseMatrix<double>;

// Equality form A x = b, x >= 0, b >= 0: one slack per inequality row, rows
// with negative right-hand side negated.
struct StandardForm {
  Sparse a;
  Eigen::VectorXd b, c;
  int original = 0;
};

StandardForm standardize(const LinearProgram &lp) {
  const int n = lp.variables();
  const int m = static_cast<int>(lp.rows.size());
  int slacks = 0;
  for (const LpRow &r : lp.rows)
    slacks += r.sense != RowSense::kEq;
  StandardForm f;
  f.original = n;
  f.b.resize(m);
  f.c = Eigen::VectorXd::Zero(n + slacks);
  f.c.head(n) = lp.cost;
  std::vector<Eigen::Triplet<double>> t;
  int next = n;
  for (int i = 0; i < m; ++i) {
    const LpRow &r = lp.rows[i];
    const double sign = r.rhs < 0 ? -1.0 : 1.0;
    for (const auto &[v, coef] : r.terms) {
      require(v >= 0 && v < n, ErrorKind::kInvalidInput,
              "LP row references an unknown variable");
      t.emplace_back(i, v, sign * coef);
    }
    if (r.sense == RowSense::kLe)
      t.emplace_back(i, next++, sign);
    else if (r.sense == RowSense::kGe)
      t.emplace_back(i, next++, -sign);
    f.b(i) = sign * r.rhs;
  }
  f.a.resize(m, n + slacks);
  f.a.setFromTriplets(t.begin(), t.end());
  return f;
}

// Largest step in (0, 1] keeping v + step * dv >= 0.
double step_to_boundary(const Eigen::VectorXd &v, const Eigen::VectorXd &dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv(i) < 0)
      step = std::min(step, -v(i) / dv(i));
  return step;
}

// Solves (A D A^T) v = r. Columns with many nonzeros would make A D A^T
// dense, so they are kept out of the product and enter through the
// augmented quasi-definite system
//   [ A_s D_s A_s^T   U      ] [v]   [r]
//   [ U^T            -D_u^-1 ] [w] = [0]
// (U the dense columns), which stays sparse. Every row keeps at least one
// sparse column so the leading block is definite; each solve is refined
// against the exact operator.
class NormalEquations {
public:
  explicit NormalEquations(const Sparse &a) : a_(a), at_(a.transpose()) {
    const Eigen::Index n = a.cols();
    const double avg = double(a.nonZeros()) / std::max<Eigen::Index>(n, 1);
    const double limit = std::max(16.0, 8.0 * avg);
    std::vector<char> is_dense(n, 0);
    for (Eigen::Index j = 0; j < n; ++j)
      is_dense[j] = a.col(j).nonZeros() > limit;
    // A row touching only dense columns would leave a zero pivot; keep its
    // sparsest column in the sparse part.
    const Sparse rows = a.transpose();
    for (Eigen::Index i = 0; i < rows.outerSize(); ++i) {
      Eigen::Index pick = -1;
      bool covered = false;
      for (Sparse::InnerIterator it(rows, i); it; ++it) {
        if (!is_dense[it.row()]) {
          covered = true;
          break;
        }
        if (pick < 0 || a.col(it.row()).nonZeros() < a.col(pick).nonZeros())
          pick = it.row();
      }
      if (!covered && pick >= 0)
        is_dense[pick] = 0;
    }
    std::vector<Eigen::Triplet<double>> keep, dense;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (is_dense[j])
        dense_.push_back(static_cast<int>(j));
      for (Sparse::InnerIterator it(a, j); it; ++it)
        if (is_dense[j])
          dense.emplace_back(it.row(), dense_.size() - 1, it.value());
        else
          keep.emplace_back(it.row(), j, it.value());
    }
    sparse_.resize(a.rows(), n);
    sparse_.setFromTriplets(keep.begin(), keep.end());
    sparse_t_ = sparse_.transpose();
    u_.resize(a.rows(), static_cast<Eigen::Index>(dense_.size()));
    u_.setFromTriplets(dense.begin(), dense.end());
  }

  void factor(const Eigen::VectorXd &d) {
    d_ = d;
    const Eigen::Index m = a_.rows(), q = u_.cols();
    const Sparse inner = sparse_ * d.asDiagonal() * sparse_t_;
    double top = inner.size() ? inner.diagonal().maxCoeff() : 0.0;
    for (int c : dense_)
      top = std::max(top, d(c));
    top = std::max(top, 1e-300);
    auto assemble = [&](double ridge) {
      std::vector<Eigen::Triplet<double>> t;
      t.reserve(inner.nonZeros() + 2 * u_.nonZeros() + m + q);
      for (Eigen::Index j = 0; j < inner.outerSize(); ++j)
        for (Sparse::InnerIterator it(inner, j); it; ++it)
          t.emplace_back(it.row(), it.col(), it.value());
      for (Eigen::Index j = 0; j < q; ++j)
        for (Sparse::InnerIterator it(u_, j); it; ++it) {
          t.emplace_back(it.row(), m + j, it.value());
          t.emplace_back(m + j, it.row(), it.value());
        }
      for (Eigen::Index i = 0; i < m; ++i)
        t.emplace_back(i, i, ridge * top);
      for (Eigen::Index j = 0; j < q; ++j)
        t.emplace_back(m + j, m + j, -1.0 / std::clamp(d(dense_[j]), 1e-30, 1e30));
      Sparse k(m + q, m + q);
      k.setFromTriplets(t.begin(), t.end());
      return k;
    };
    Sparse k = assemble(1e-15);
    if (!analyzed_) {
      chol_.analyzePattern(k);
      analyzed_ = true;
    }
    chol_.factorize(k);
    for (double ridge = 1e-13; chol_.info() != Eigen::Success && ridge < 1e-5;
         ridge *= 100)
      chol_.factorize(assemble(ridge));
    require(chol_.info() == Eigen::Success, ErrorKind::kSolverError,
            "interior point: normal equations factorization failed");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd &rhs) const {
    Eigen::VectorXd v = apply_inverse(rhs);
    for (int r = 0; r < 5; ++r) {
      const Eigen::VectorXd res = rhs - a_ * d_.cwiseProduct(at_ * v);
      if (res.norm() <= 1e-14 * (1.0 + rhs.norm()))
        break;
      v += apply_inverse(res);
    }
    return v;
  }

private:
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd &r) const {
    const Eigen::Index m = a_.rows();
    Eigen::VectorXd full = Eigen::VectorXd::Zero(m + u_.cols());
    full.head(m) = r;
    return chol_.solve(full).head(m);
  }

  const Sparse &a_;
  Sparse at_, sparse_, sparse_t_, u_;
  std::vector<int> dense_;
  Eigen::VectorXd d_;
  Eigen::SimplicialLDLT<Sparse> chol_;
  bool analyzed_ = false;
};

} // namespace

double lp_violation(const LinearProgram &lp, const Eigen::VectorXd &x) {
  require(x.size() == lp.variables(), ErrorKind::kInvalidInput,
          "solution size does not match the program");
  double worst = x.size() ? std::max(0.0, -x.minCoeff()) : 0.0;
  for (const LpRow &r : lp.rows) {
    double lhs = 0.0;
    for (const auto &[v, coef] : r.terms)
      lhs += coef * x(v);
    const double gap = lhs - r.rhs;
    switch (r.sense) {
    case RowSense::kLe:
      worst = std::max(worst, gap);
      break;
    case RowSense::kGe:
      worst = std::max(worst, -gap);
      break;
    case RowSense::kEq:
      worst = std::max(worst, std::abs(gap));
      break;
    }
  }
  return worst;
}

LpSolution SimplexSolver::solve(const LinearProgram &lp) const {
  const StandardForm f = standardize(lp);
  const int m = static_cast<int>(f.a.rows());
  const int ncols = static_cast<int>(f.a.cols());
  const int total = ncols + m; // plus one artificial per row
  using Tableau =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  // Rows 0..m-1 constraints, row m objective; last column right-hand side.
  Tableau t = Tableau::Zero(m + 1, total + 1);
  t.topLeftCorner(m, ncols) = Eigen::MatrixXd(f.a);
  t.block(0, ncols, m, m).setIdentity();
  t.topRightCorner(m, 1) = f.b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i)
    basis[i] = ncols + i;
  const double eps = 1e-9;
  int pivots = 0;

  auto pivot = [&](int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i <= m; ++i)
      if (i != r && t(i, c) != 0.0)
        t.row(i) -= t(i, c) * t.row(r);
    basis[r] = c;
    ++pivots;
  };

  // Minimizes the objective row over columns [0, allowed).
  auto run = [&](int allowed) {
    int degenerate = 0;
    while (true) {
      require(pivots < max_pivots_, ErrorKind::kSolverError,
              "simplex: pivot limit reached");
      // Dantzig's rule; Bland's after a long degenerate streak.
      const bool bland = degenerate > 50;
      int enter = -1;
      double best = -eps;
      for (int j = 0; j < allowed; ++j)
        if (t(m, j) < best) {
          enter = j;
          if (bland)
            break;
          best = t(m, j);
        }
      if (enter < 0)
        return;
      int leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i)
        if (t(i, enter) > eps) {
          const double q = t(i, total) / t(i, enter);
          if (q < ratio - 1e-12 ||
              (q <= ratio + 1e-12 && leave >= 0 && basis[i] < basis[leave])) {
            ratio = std::min(ratio, q);
            leave = i;
          }
        }
      require(leave >= 0, ErrorKind::kSolverError, "simplex: unbounded program");
      degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
      pivot(leave, enter);
    }
  };

  // Phase one: minimize the sum of artificials.
  for (int i = 0; i < m; ++i)
    t.row(m) -= t.row(i);
  t.block(m, ncols, 1, m).setZero();
  run(total);
  const double infeasibility = -t(m, total);
  require(infeasibility <= 1e-7 * std::max(1.0, f.b.cwiseAbs().maxCoeff()),
          ErrorKind::kSolverError, "simplex: program is infeasible");
  // Drive zero-level artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < ncols)
      continue;
    for (int j = 0; j < ncols; ++j)
      if (std::abs(t(i, j)) > eps) {
        pivot(i, j);
        break;
      }
  }

  // Phase two.
  t.row(m).setZero();
  t.row(m).head(ncols) = f.c.transpose();
  for (int i = 0; i < m; ++i)
    if (basis[i] < ncols && f.c(basis[i]) != 0.0)
      t.row(m) -= f.c(basis[i]) * t.row(i);
  run(ncols);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(ncols);
  for (int i = 0; i < m; ++i)
    if (basis[i] < ncols)
      x(basis[i]) = std::max(0.0, t(i, total));
  LpSolution s;
  s.x = x.head(f.original);
  s.objective = lp.cost.dot(s.x);
  s.iterations = pivots;
  return s;
}

LpSolution InteriorPointSolver::solve(const LinearProgram &lp) const {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const StandardForm f = standardize(lp);
  const Sparse &a = f.a;
  const Sparse at = a.transpose();
  const Eigen::Index m = a.rows(), n = a.cols();
  require(m > 0, ErrorKind::kInvalidInput, "LP has no rows");

  NormalEquations normal(a);
  auto factor = [&](const Eigen::VectorXd &diag) { normal.factor(diag); };
  auto normal_solve = [&](const Eigen::VectorXd &rhs) {
    return normal.solve(rhs);
  };

  // Mehrotra's starting point.
  factor(Eigen::VectorXd::Ones(n));
  Eigen::VectorXd x = at * normal_solve(f.b);
  Eigen::VectorXd y = normal_solve(a * f.c);
  Eigen::VectorXd s = f.c - at * y;
  x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
  s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
  {
    const double xs = x.dot(s);
    const double dx = 0.5 * xs / std::max(s.sum(), 1e-300);
    const double ds = 0.5 * xs / std::max(x.sum(), 1e-300);
    x.array() += dx + 1e-8;
    s.array() += ds + 1e-8;
  }

  const double bnorm = 1.0 + f.b.norm(), cnorm = 1.0 + f.c.norm();
  LpSolution out;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd rp = f.b - a * x;
    const Eigen::VectorXd rd = f.c - at * y - s;
    const double pobj = f.c.dot(x), dobj = f.b.dot(y);
    const double mu = x.dot(s) / n;
    if (rp.norm() / bnorm < opts_.tol && rd.norm() / cnorm < opts_.tol &&
        std::abs(pobj - dobj) / (1.0 + std::abs(pobj)) < opts_.tol) {
      out.iterations = it;
      break;
    }
    require(it < opts_.max_iters, ErrorKind::kSolverError,
            "interior point: iteration limit reached without convergence");
    require(std::chrono::duration<double>(Clock::now() - start).count() <
                opts_.max_seconds,
            ErrorKind::kSolverError,
            "interior point: time limit reached; partial result discarded");
    require(x.allFinite() && s.allFinite() && y.allFinite(),
            ErrorKind::kSolverError, "interior point: iterate diverged");
    // Infeasible or unbounded programs drive the iterates off to infinity.
    require(x.lpNorm<Eigen::Infinity>() < 1e14 && s.lpNorm<Eigen::Infinity>() < 1e14,
            ErrorKind::kSolverError,
            "interior point: program appears infeasible or unbounded");

    const Eigen::VectorXd d = x.cwiseQuotient(s);
    factor(d);
    auto direction = [&](const Eigen::VectorXd &rxs, Eigen::VectorXd &dx,
                         Eigen::VectorXd &dy, Eigen::VectorXd &ds) {
      const Eigen::VectorXd rhs =
          rp - a * rxs.cwiseQuotient(s) + a * d.cwiseProduct(rd);
      dy = normal_solve(rhs);
      ds = rd - at * dy;
      dx = rxs.cwiseQuotient(s) - d.cwiseProduct(ds);
    };

    Eigen::VectorXd dx, dy, ds;
    const Eigen::VectorXd xs = x.cwiseProduct(s);
    direction(-xs, dx, dy, ds);
    const double ap = step_to_boundary(x, dx), ad = step_to_boundary(s, ds);
    const double mu_aff = (x + ap * dx).dot(s + ad * ds) / n;
    const double sigma = std::pow(mu_aff / mu, 3);

    const Eigen::VectorXd rxs =
        (-xs - dx.cwiseProduct(ds)).array() + sigma * mu;
    direction(rxs, dx, dy, ds);
    const double p = std::min(1.0, 0.995 * step_to_boundary(x, dx));
    const double q = std::min(1.0, 0.995 * step_to_boundary(s, ds));
    x += p * dx;
    y += q * dy;
    s += q * ds;
  }
  out.x = x.head(f.original).cwiseMax(0.0);
  out.objective = lp.cost.dot(out.x);
  return out;
}

std::unique_ptr<LpSolver> make_lp_solver(const std::string &name) {
  if (name == "ipm")
    return std::make_unique<InteriorPointSolver>();
  if (name == "simplex")
    return std::make_unique<SimplexSolver>();
  throw Error(ErrorKind::kInvalidParameter,
              "unknown LP solver '" + name + "' (expected ipm or simplex)");
}

void write_lp(std::ostream &out, const LinearProgram &lp) {
  auto var = [&](int v) {
    return v < static_cast<int>(lp.names.size()) ? lp.names[v]
                                                  : "x" + std::to_string(v);
  };
  // Long expressions continue on indented lines; some readers cap the line
  // length.
  std::streamoff mark = 0;
  auto term = [&](std::ostringstream &line, bool first, double c, int v) {
    if (first)
      mark = 0;
    else if (line.tellp() - mark > 200) {
      line << "\n ";
      mark = line.tellp();
    }
    if (c < 0)
      line << (first ? "- " : " - ");
    else if (!first)
      line << " + ";
    if (std::abs(c) != 1.0)
      line << std::abs(c) << ' ';
    line << var(v);
  };
  std::ostringstream obj;
  obj.precision(17);
  bool any = false;
  for (int v = 0; v < lp.variables(); ++v)
    if (lp.cost(v) != 0.0) {
      term(obj, !any, lp.cost(v), v);
      any = true;
    }
  if (!any)
    obj << "0 " << var(0);
  out << "Minimize\n obj: " << obj.str();
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    const LpRow &r = lp.rows[i];
    std::ostringstream line;
    line.precision(17);
    line << ' ' << (r.name.empty() ? "c" + std::to_string(i) : r.name) << ": ";
    bool first = true;
    for (const auto &[v, c] : r.terms) {
      term(line, first, c, v);
      first = false;
    }
    if (first)
      line << "0 " << var(0);
    line << (r.sense == RowSense::kLe   ? " <= "
             : r.sense == RowSense::kGe ? " >= "
                                        : " = ")
         << r.rhs;
    out << line.str() << '\n';
  }
  out << "Bounds\n";
  for (int v = 0; v < lp.variables(); ++v)
    out << ' ' << var(v) << " >= 0\n";
  out << "End\n";
}

} // namespace ordembed
