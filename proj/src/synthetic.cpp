#include "ordembed/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include "ordembed/error.hpp"
#include "ordembed/seeding.hpp"

namespace ordembed {

namespace {

int native_dim(DensityKind kind) {
  switch (kind) {
  case DensityKind::kPC:
  case DensityKind::kPCS:
  case DensityKind::kGauss:
    return 2;
  case DensityKind::kHalfCube:
  case DensityKind::kDonut:
    return 3;
  }
  return 0;
}

void validate(const SyntheticDensitySpec &spec) {
  require(spec.dim == native_dim(spec.kind), ErrorKind::kInvalidParameter,
          to_string(spec.kind) + " requires dim " +
              std::to_string(native_dim(spec.kind)));
  require(spec.ratio > 0.0 && std::isfinite(spec.ratio),
          ErrorKind::kInvalidParameter, "density ratio must be positive");
  require(spec.sigma > 0.0 && std::isfinite(spec.sigma),
          ErrorKind::kInvalidParameter, "sigma must be positive");
}

bool in_pcs_square(double x, double y) {
  return x >= 0.25 && x <= 0.75 && y >= 0.25 && y <= 0.75;
}

// Mass of the high-density region for a region of `area` within a unit box.
double heavy_mass(double area, double ratio) {
  return ratio * area / (ratio * area + (1.0 - area));
}

} // namespace

SyntheticDensitySpec default_spec(DensityKind kind, std::uint64_t seed) {
  SyntheticDensitySpec s;
  s.kind = kind;
  s.dim = native_dim(kind);
  s.ratio = kind == DensityKind::kPCS ? 2.0 : 4.0;
  s.seed = seed;
  return s;
}

DensityKind parse_density_kind(const std::string &name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "pc")
    return DensityKind::kPC;
  if (s == "pcs")
    return DensityKind::kPCS;
  if (s == "gauss")
    return DensityKind::kGauss;
  if (s == "halfcube")
    return DensityKind::kHalfCube;
  if (s == "donut")
    return DensityKind::kDonut;
  throw Error(ErrorKind::kInvalidParameter, "unknown dataset '" + name + "'");
}

std::string to_string(DensityKind kind) {
  switch (kind) {
  case DensityKind::kPC:
    return "pc";
  case DensityKind::kPCS:
    return "pcs";
  case DensityKind::kGauss:
    return "gauss";
  case DensityKind::kHalfCube:
    return "halfcube";
  case DensityKind::kDonut:
    return "donut";
  }
  return "?";
}

PointCloud generate(const SyntheticDensitySpec &spec, int n) {
  validate(spec);
  require(n >= 1, ErrorKind::kInvalidParameter, "n must be >= 1");
  std::mt19937_64 rng(derive_seed(spec.seed, {0x6461u}));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(spec.dim, n);

  switch (spec.kind) {
  case DensityKind::kPC:
  case DensityKind::kHalfCube: {
    std::bernoulli_distribution heavy(heavy_mass(0.5, spec.ratio));
    for (int i = 0; i < n; ++i) {
      const double u = unif(rng);
      x(0, i) = heavy(rng) ? 0.5 + 0.5 * u : 0.5 * u;
      for (int a = 1; a < spec.dim; ++a)
        x(a, i) = unif(rng);
    }
    break;
  }
  case DensityKind::kPCS: {
    std::bernoulli_distribution heavy(heavy_mass(0.25, spec.ratio));
    for (int i = 0; i < n; ++i) {
      if (heavy(rng)) {
        x(0, i) = 0.25 + 0.5 * unif(rng);
        x(1, i) = 0.25 + 0.5 * unif(rng);
      } else {
        double px, py;
        do {
          px = unif(rng);
          py = unif(rng);
        } while (in_pcs_square(px, py));
        x(0, i) = px;
        x(1, i) = py;
      }
    }
    break;
  }
  case DensityKind::kGauss:
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < spec.dim; ++a)
        x(a, i) = spec.center + spec.sigma * normal(rng);
    break;
  case DensityKind::kDonut: {
    const double ext = kDonutMajor + kDonutMinor;
    std::uniform_real_distribution<double> box(-ext, ext);
    std::uniform_real_distribution<double> zbox(-kDonutMinor, kDonutMinor);
    for (int i = 0; i < n; ++i) {
      double px, py, pz;
      do {
        px = box(rng);
        py = box(rng);
        pz = zbox(rng);
      } while (std::pow(kDonutMajor - std::hypot(px, py), 2) + pz * pz >
               kDonutMinor * kDonutMinor);
      x(0, i) = px;
      x(1, i) = py;
      x(2, i) = pz;
    }
    break;
  }
  }
  return PointCloud(std::move(x));
}

double true_density(const SyntheticDensitySpec &spec,
                    const Eigen::VectorXd &x) {
  validate(spec);
  require(x.size() == spec.dim, ErrorKind::kInvalidInput,
          "query point has wrong dimension");
  auto in_unit_box = [&] {
    return (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
  };
  switch (spec.kind) {
  case DensityKind::kPC:
  case DensityKind::kHalfCube: {
    if (!in_unit_box())
      return 0.0;
    const double low = 2.0 / (1.0 + spec.ratio);
    return x(0) > 0.5 ? spec.ratio * low : low;
  }
  case DensityKind::kPCS: {
    if (!in_unit_box())
      return 0.0;
    const double low = 1.0 / (0.75 + 0.25 * spec.ratio);
    return in_pcs_square(x(0), x(1)) ? spec.ratio * low : low;
  }
  case DensityKind::kGauss: {
    const double r2 = (x.array() - spec.center).square().sum();
    const double s2 = spec.sigma * spec.sigma;
    return std::exp(-0.5 * r2 / s2) /
           std::pow(2.0 * std::numbers::pi * s2, 0.5 * spec.dim);
  }
  case DensityKind::kDonut: {
    const double q = kDonutMajor - std::hypot(x(0), x(1));
    if (q * q + x(2) * x(2) > kDonutMinor * kDonutMinor)
      return 0.0;
    return 1.0 / (2.0 * std::numbers::pi * std::numbers::pi * kDonutMajor *
                  kDonutMinor * kDonutMinor);
  }
  }
  return 0.0;
}

} // namespace ordembed
