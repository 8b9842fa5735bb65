#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordembed/point_cloud.hpp"
#include "ordembed/synthetic.hpp"

namespace ordembed {

struct Box {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

// Smallest box holding every point.
Box bounding_box(const PointCloud &cloud);

// Density on a g x g grid over `domain`; value(i, j) is the density of the
// cell with x index i and y index j, in probability per unit area.
struct DensityGrid {
  Box domain;
  Eigen::MatrixXd value;
  double lambda = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;

  int resolution() const { return static_cast<int>(value.rows()); }
  double cell_area() const;
  double mass() const; // sum of value * cell_area
  Eigen::Vector2d cell_center(int i, int j) const;
};

struct TvMpleConfig {
  double lambda = 1e-4; // TV weight
  double rho = 1.0;     // splitting penalty
  double gamma = 1.0;   // normalization penalty
  int iterations = 200;
  int inner_sweeps = 2;
  int resolution = 64;
  double floor = 1e-12;
  std::optional<Box> domain; // bounding box of the points otherwise
};

// TV-penalized maximum likelihood density by split Bregman. The unknown is
// the relative density u (mean one over the grid). With G = g^2 cells, the
// scaled objective is
//   w |d|_1 - sum_c (G n_c / n) log u_c + rho/2 |D u - d + y|^2
//     + gamma G / 2 (sum(u) / G - 1 + z)^2
// with D forward differences (Neumann boundary) and w = tv_edge_weight.
// Cells are updated by Gauss-Seidel on the exact per-cell minimizer (a
// quadratic root); d by isotropic shrinkage with threshold w / rho.
DensityGrid tv_mple(const PointCloud &points, const TvMpleConfig &config = {});

// Weight of |d|_1 in the scaled objective: 640 lambda g, i.e. 10 lambda G at
// the default g = 64, and proportional to the continuum TV under refinement.
double tv_edge_weight(double lambda, int resolution);

// Augmented objective of the u-subproblem at fixed d, y, z (for checks).
double tv_mple_u_objective(const Eigen::MatrixXd &u,
                           const Eigen::MatrixXd &counts, int n,
                           const Eigen::MatrixXd &dx, const Eigen::MatrixXd &dy,
                           const Eigen::MatrixXd &yx, const Eigen::MatrixXd &yy,
                           double z, const TvMpleConfig &config);

// Point counts per cell; points outside `domain` go to the nearest cell and
// are counted in `clamped`.
Eigen::MatrixXd cell_counts(const PointCloud &points, const Box &domain,
                            int resolution, int *clamped = nullptr);

// sum_c |value_c - true density at the cell center| * cell_area
double density_l1_error(const DensityGrid &grid,
                        const SyntheticDensitySpec &truth);

// Similarity-aligns `embedding` onto `reference` (if given) or rescales it
// isotropically into the unit box, then runs tv_mple on `domain` (unit box
// by default).
DensityGrid density_from_embedding(const PointCloud &embedding,
                                   const PointCloud *reference,
                                   const TvMpleConfig &config);

// CSV matrix, one grid row per line from the top (largest y) down, after a
// `#` header line recording the domain and lambda.
void write_density_csv(std::ostream &out, const DensityGrid &grid);
// Binary 16-bit PGM scaled to the grid maximum, same orientation and header.
void write_density_pgm(std::ostream &out, const DensityGrid &grid);
void save_density(const std::filesystem::path &stem, const DensityGrid &grid);

} // namespace ordembed
