#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ordembed/baselines.hpp"
#include "ordembed/graph.hpp"
#include "ordembed/point_cloud.hpp"

namespace ordembed {

enum class RowSense { kLe, kGe, kEq };

struct LpRow {
  std::vector<std::pair<int, double>> terms; // (variable, coefficient)
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
  std::string name;
};

// min cost^T x  subject to the rows and x >= 0.
struct LinearProgram {
  Eigen::VectorXd cost;
  std::vector<LpRow> rows;
  std::vector<std::string> names; // one per variable

  int variables() const { return static_cast<int>(cost.size()); }
};

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

// Largest violation of any row or of x >= 0.
double lp_violation(const LinearProgram &lp, const Eigen::VectorXd &x);

// Solvers throw SolverError on infeasible or unbounded programs, and on
// running out of iterations or time.
class LpSolver {
public:
  virtual ~LpSolver() = default;
  virtual LpSolution solve(const LinearProgram &lp) const = 0;
  virtual std::string name() const = 0;
};

// Dense two-phase tableau simplex with Bland's rule. Exact vertex solutions;
// memory is rows x (variables + rows), so only for small programs.
class SimplexSolver : public LpSolver {
public:
  explicit SimplexSolver(int max_pivots = 200000) : max_pivots_(max_pivots) {}
  LpSolution solve(const LinearProgram &lp) const override;
  std::string name() const override { return "simplex"; }

private:
  int max_pivots_;
};

// Mehrotra predictor-corrector on the standard form, sparse normal
// equations.
class InteriorPointSolver : public LpSolver {
public:
  struct Options {
    double tol = 1e-10;
    int max_iters = 200;
    double max_seconds = 600.0;
  };
  InteriorPointSolver() = default;
  explicit InteriorPointSolver(Options o) : opts_(o) {}
  LpSolution solve(const LinearProgram &lp) const override;
  std::string name() const override { return "ipm"; }

private:
  Options opts_;
};

std::unique_ptr<LpSolver> make_lp_solver(const std::string &name);

// CPLEX-style LP text (see docs/lp_format.md).
void write_lp(std::ostream &out, const LinearProgram &lp);

struct LpEmConfig {
  double total_radius = 0.0;      // V; n when <= 0
  double margin_factor = 1e-3;    // epsilon = margin_factor * V / n
  int triangle_budget = -1;       // 20 n when < 0
  std::uint64_t seed = 0;         // triangle sample
  int max_n = 200;
  std::string solver = "ipm";
  StressConfig mds;
};

// Ordered triple (i, j, m): D_ij <= D_im + D_mj.
using Triangle = std::array<int, 3>;

// Triangles through a common neighbor first (path i - m - j in the
// symmetrized graph), shuffled, then distinct uniform random triples; the
// budget takes a prefix, so smaller budgets give nested subsets.
std::vector<Triangle> sample_triangles(const Digraph &g, int budget,
                                       std::uint64_t seed);

struct LpEmProblem {
  LinearProgram lp;
  int n = 0;
  double margin = 0.0;
  std::vector<Triangle> triangles;
  int distance_var(int i, int j) const; // i != j
  int radius_var(int i) const { return n * (n - 1) / 2 + i; }
};

LpEmProblem build_lp(const Digraph &g, const LpEmConfig &config);

struct LpEmResult {
  Eigen::MatrixXd distances; // symmetric, zero diagonal
  Eigen::VectorXd radii;
  double objective = 0.0;
  double violation = 0.0; // lp_violation of the returned solution
  int iterations = 0;
  LpEmProblem problem;
  Eigen::VectorXd x;
};

LpEmResult lp_solve(const Digraph &g, const LpEmConfig &config = {});
LpEmResult lp_solve(const KnnGraph &g, const LpEmConfig &config = {});

// lp_solve followed by stress MDS on the distances.
PointCloud lpem_embed(const KnnGraph &g, int d, const LpEmConfig &config = {});

} // namespace ordembed
