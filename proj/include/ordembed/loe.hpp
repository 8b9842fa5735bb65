#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ordembed/graph.hpp"

namespace ordembed {

// Distance inside the hinge: squared Euclidean (default) or plain.
enum class DistanceMode { kSquared, kPlain };

// dist(i, j) + delta <= dist(k, l) is the satisfied state.
struct Quadruple {
  int i, j, k, l;
};

// Ordinal constraints either as explicit quadruples or in anchored form: for
// anchor a with neighbor set N(a), every (a, b, a, c) with b in N(a) and c
// outside N(a) u {a}. Anchored constraints are never materialized.
class OrdinalProblem {
public:
  static OrdinalProblem from_graph(const Digraph &g, int dim,
                                   double delta = 1.0);
  static OrdinalProblem from_quadruples(int n, int dim,
                                        std::vector<Quadruple> constraints,
                                        double delta = 1.0);

  int size() const { return n_; }
  int dim() const { return dim_; }
  double delta() const { return delta_; }
  bool anchored() const { return anchored_; }
  const Digraph &graph() const { return graph_; }
  const std::vector<Quadruple> &quadruples() const { return quads_; }

  std::size_t constraint_count() const;

  // Streams every constraint in a fixed order.
  template <class Fn> void for_each_constraint(Fn &&fn) const {
    if (!anchored_) {
      for (const Quadruple &q : quads_)
        fn(q);
      return;
    }
    std::vector<char> is_nb(n_, 0);
    for (int a = 0; a < n_; ++a) {
      for (int b : graph_.out(a))
        is_nb[b] = 1;
      for (int b : graph_.out(a))
        for (int c = 0; c < n_; ++c)
          if (c != a && !is_nb[c])
            fn(Quadruple{a, b, a, c});
      for (int b : graph_.out(a))
        is_nb[b] = 0;
    }
  }

  OrdinalProblem with_delta(double delta) const;

private:
  int n_ = 0;
  int dim_ = 0;
  double delta_ = 1.0;
  bool anchored_ = false;
  Digraph graph_;
  std::vector<Quadruple> quads_;
};

double loe_energy(const Eigen::MatrixXd &x, const OrdinalProblem &p,
                  DistanceMode mode = DistanceMode::kPlain);
Eigen::MatrixXd loe_gradient(const Eigen::MatrixXd &x, const OrdinalProblem &p,
                             DistanceMode mode = DistanceMode::kPlain);
// Energy, with the gradient written to `grad` when non-null.
double loe_evaluate(const Eigen::MatrixXd &x, const OrdinalProblem &p,
                    DistanceMode mode, Eigen::MatrixXd *grad);

enum class LoeMethod { kBfgs, kMm };
enum class LoeInit { kRandomGaussian, kGiven };

struct LoeConfig {
  int max_iters = 100;
  LoeMethod method = LoeMethod::kBfgs;
  LoeInit init = LoeInit::kRandomGaussian;
  std::uint64_t seed = 0;
  double grad_tol = 1e-9; // relative to the initial gradient norm
  DistanceMode mode = DistanceMode::kPlain;
  std::optional<Eigen::MatrixXd> initial; // required for kGiven
  double init_scale = 1.0; // multiplies the random start's spread
  // Above this many unknowns BFGS keeps a limited-memory inverse Hessian.
  int dense_bfgs_limit = 4000;
  int lbfgs_memory = 20;
};

struct LoeResult {
  Eigen::MatrixXd x;
  double energy = 0.0;
  double initial_energy = 0.0;
  int iterations = 0;
  int evaluations = 0; // objective evaluations
  bool converged = false;
  bool line_search_failed = false; // warning: best iterate so far returned
  std::vector<double> energy_trace; // energy after each accepted iteration
};

LoeResult loe_embed(const OrdinalProblem &p, const LoeConfig &config);

// I.i.d. normal coordinates scaled so the expected pairwise distance is
// scale * unit * n^(1/d). loe_embed passes unit = sqrt(delta) for squared
// distances and delta for plain ones.
Eigen::MatrixXd loe_random_init(int n, int dim, double unit,
                                std::uint64_t seed, double scale = 1.0);

// Graph induced on `vertices` (relabelled in the given order), keeping only
// edges with both ends inside.
Digraph induced_digraph(const Digraph &g, std::span<const int> vertices);

} // namespace ordembed
