#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "ordembed/point_cloud.hpp"

namespace ordembed {

enum class DensityKind { kPC, kPCS, kGauss, kHalfCube, kDonut };

// Geometry of the synthetic densities:
//   PC       unit square, right half (x > 0.5) carries `ratio` times the
//            density of the left half
//   PCS      unit square, centred sub-square [0.25, 0.75]^2 carries `ratio`
//            times the density of the rest
//   Gauss    isotropic normal, mean `center`, standard deviation `sigma`
//   halfcube unit cube, half x > 0.5 carries `ratio` times the density
//   donut    solid torus, major radius 1, minor radius 0.4, uniform
struct SyntheticDensitySpec {
  DensityKind kind = DensityKind::kPC;
  int dim = 2;
  double ratio = 4.0;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  double center = 0.0; // same value on every axis
};

// Defaults per kind: PC/halfcube ratio 4, PCS ratio 2, dims from the kind.
SyntheticDensitySpec default_spec(DensityKind kind, std::uint64_t seed = 0);

DensityKind parse_density_kind(const std::string &name);
std::string to_string(DensityKind kind);

PointCloud generate(const SyntheticDensitySpec &spec, int n);

// Probability density of the spec at `x` (integrates to one over R^d).
double true_density(const SyntheticDensitySpec &spec,
                    const Eigen::VectorXd &x);

inline constexpr double kDonutMajor = 1.0;
inline constexpr double kDonutMinor = 0.4;

} // namespace ordembed
