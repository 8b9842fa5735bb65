#include "ordembed/density.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ordembed/error.hpp"
#include "ordembed/metrics.hpp"

namespace ordembed {

namespace {

// Forward differences; the last column (x) or row (y) of each field is zero.
void gradient(const Eigen::MatrixXd &u, Eigen::MatrixXd &gx,
              Eigen::MatrixXd &gy) {
  const Eigen::Index g = u.rows();
  gx.setZero(g, g);
  gy.setZero(g, g);
  gx.topRows(g - 1) = u.bottomRows(g - 1) - u.topRows(g - 1);
  gy.leftCols(g - 1) = u.rightCols(g - 1) - u.leftCols(g - 1);
}

std::string header(const DensityGrid &grid) {
  std::ostringstream h;
  h << std::setprecision(17) << "# domain x0=" << grid.domain.x0
    << " x1=" << grid.domain.x1 << " y0=" << grid.domain.y0
    << " y1=" << grid.domain.y1 << " lambda=" << grid.lambda
    << " resolution=" << grid.resolution();
  return h.str();
}

} // namespace

double tv_edge_weight(double lambda, int resolution) {
  // 10 lambda G at g = 64, falling as 1/g so refining the grid approximates
  // one continuum problem.
  return 640.0 * lambda * resolution;
}

Box bounding_box(const PointCloud &cloud) {
  require(cloud.dim() == 2 && cloud.size() > 0, ErrorKind::kInvalidInput,
          "bounding box needs a nonempty 2D cloud");
  const Eigen::Vector2d lo = cloud.coords().rowwise().minCoeff();
  const Eigen::Vector2d hi = cloud.coords().rowwise().maxCoeff();
  return {lo(0), hi(0), lo(1), hi(1)};
}

double DensityGrid::cell_area() const {
  const double g = resolution();
  return domain.area() / (g * g);
}

double DensityGrid::mass() const { return value.sum() * cell_area(); }

Eigen::Vector2d DensityGrid::cell_center(int i, int j) const {
  const double g = resolution();
  return {domain.x0 + (i + 0.5) * (domain.x1 - domain.x0) / g,
          domain.y0 + (j + 0.5) * (domain.y1 - domain.y0) / g};
}

Eigen::MatrixXd cell_counts(const PointCloud &points, const Box &domain,
                            int resolution, int *clamped) {
  require(points.dim() == 2, ErrorKind::kInvalidInput,
          "density estimation is 2D only");
  require(domain.x1 > domain.x0 && domain.y1 > domain.y0,
          ErrorKind::kInvalidInput, "density domain has zero area");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(resolution, resolution);
  int out = 0;
  auto index = [&](double v, double lo, double hi) {
    const double t = (v - lo) / (hi - lo) * resolution;
    int k = static_cast<int>(std::floor(t));
    // The upper edge belongs to the last cell.
    if (v == hi)
      k = resolution - 1;
    if (k < 0 || k >= resolution || v < lo || v > hi) {
      ++out;
      k = std::clamp(k, 0, resolution - 1);
    }
    return k;
  };
  for (int p = 0; p < points.size(); ++p) {
    const auto x = points.point(p);
    require(std::isfinite(x(0)) && std::isfinite(x(1)), ErrorKind::kInvalidInput,
            "non-finite point");
    const int before = out;
    const int i = index(x(0), domain.x0, domain.x1);
    const int j = index(x(1), domain.y0, domain.y1);
    out = before + (out > before ? 1 : 0);
    c(i, j) += 1.0;
  }
  if (clamped)
    *clamped = out;
  return c;
}

double tv_mple_u_objective(const Eigen::MatrixXd &u,
                           const Eigen::MatrixXd &counts, int n,
                           const Eigen::MatrixXd &dx, const Eigen::MatrixXd &dy,
                           const Eigen::MatrixXd &yx, const Eigen::MatrixXd &yy,
                           double z, const TvMpleConfig &cfg) {
  const Eigen::Index g = u.rows();
  const double cells = double(g) * g;
  double e = 0.0;
  for (Eigen::Index j = 0; j < g; ++j)
    for (Eigen::Index i = 0; i < g; ++i)
      if (counts(i, j) > 0)
        e -= cells * counts(i, j) / n * std::log(u(i, j));
  Eigen::MatrixXd gx, gy;
  gradient(u, gx, gy);
  e += 0.5 * cfg.rho * ((gx - dx + yx).squaredNorm() + (gy - dy + yy).squaredNorm());
  const double r = u.sum() / cells - 1.0 + z;
  e += 0.5 * cfg.gamma * cells * r * r;
  return e;
}

DensityGrid tv_mple(const PointCloud &points, const TvMpleConfig &cfg) {
  require(points.dim() == 2, ErrorKind::kInvalidInput,
          "density estimation is 2D only");
  require(points.size() >= 10, ErrorKind::kInvalidInput,
          "density estimation needs at least 10 points");
  require(cfg.lambda > 0 && cfg.rho > 0 && cfg.gamma > 0,
          ErrorKind::kInvalidParameter, "lambda, rho and gamma must be > 0");
  require(cfg.resolution >= 2 && cfg.iterations >= 1 && cfg.inner_sweeps >= 1,
          ErrorKind::kInvalidParameter,
          "resolution >= 2, iterations >= 1 and inner sweeps >= 1 required");
  require(cfg.floor > 0, ErrorKind::kInvalidParameter, "floor must be > 0");

  DensityGrid grid;
  grid.domain = cfg.domain ? *cfg.domain : bounding_box(points);
  grid.lambda = cfg.lambda;
  const int g = cfg.resolution;
  const double cells = double(g) * g;
  const int n = points.size();
  int clamped = 0;
  const Eigen::MatrixXd counts = cell_counts(points, grid.domain, g, &clamped);
  if (clamped > 0)
    grid.warnings.push_back(std::to_string(clamped) +
                            " points outside the domain clamped to the "
                            "nearest cell");
  require(clamped < n, ErrorKind::kInvalidInput, "no points inside the domain");

  const Eigen::MatrixXd w = counts * (cells / n);
  Eigen::MatrixXd u = Eigen::MatrixXd::Ones(g, g);
  Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(g, g), dy = dx, yx = dx, yy = dx;
  Eigen::MatrixXd gx, gy;
  double z = 0.0;
  double sum = u.sum();
  const double threshold = tv_edge_weight(cfg.lambda, g) / cfg.rho;

  for (int it = 0; it < cfg.iterations; ++it) {
    // u-subproblem: exact per-cell minimization, Gauss-Seidel order.
    for (int sweep = 0; sweep < cfg.inner_sweeps; ++sweep)
      for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) {
          int m = 0;
          double r = 0.0;
          if (i + 1 < g) {
            ++m;
            r += u(i + 1, j) - (dx(i, j) - yx(i, j));
          }
          if (i > 0) {
            ++m;
            r += u(i - 1, j) + (dx(i - 1, j) - yx(i - 1, j));
          }
          if (j + 1 < g) {
            ++m;
            r += u(i, j + 1) - (dy(i, j) - yy(i, j));
          }
          if (j > 0) {
            ++m;
            r += u(i, j - 1) + (dy(i, j - 1) - yy(i, j - 1));
          }
          const double rest = sum - u(i, j);
          const double a = cfg.rho * m + cfg.gamma / cells;
          const double b = cfg.rho * r - cfg.gamma * (rest / cells - 1.0 + z);
          double v;
          if (w(i, j) > 0) {
            const double disc = std::sqrt(b * b + 4.0 * a * w(i, j));
            v = b >= 0 ? (b + disc) / (2.0 * a) : 2.0 * w(i, j) / (disc - b);
          } else {
            v = b / a;
          }
          v = std::max(v, cfg.floor);
          sum = rest + v;
          u(i, j) = v;
        }
    sum = u.sum();

    // d-subproblem: isotropic shrinkage of grad u + y.
    gradient(u, gx, gy);
    for (int j = 0; j < g; ++j)
      for (int i = 0; i < g; ++i) {
        const double vx = gx(i, j) + yx(i, j);
        const double vy = gy(i, j) + yy(i, j);
        const double norm = std::hypot(vx, vy);
        const double s = norm > threshold ? (norm - threshold) / norm : 0.0;
        dx(i, j) = s * vx;
        dy(i, j) = s * vy;
      }
    // Keep the boundary components of the split variables at zero.
    dx.row(g - 1).setZero();
    dy.col(g - 1).setZero();

    yx += gx - dx;
    yy += gy - dy;
    z += sum / cells - 1.0;
    grid.iterations = it + 1;
  }

  require(u.allFinite(), ErrorKind::kNumericalError,
          "density iteration produced non-finite values");
  grid.value = u / grid.domain.area();
  return grid;
}

double density_l1_error(const DensityGrid &grid,
                        const SyntheticDensitySpec &truth) {
  require(truth.dim == 2, ErrorKind::kInvalidParameter,
          "density error needs a 2D truth");
  const int g = grid.resolution();
  double e = 0.0;
  for (int j = 0; j < g; ++j)
    for (int i = 0; i < g; ++i) {
      const Eigen::Vector2d c = grid.cell_center(i, j);
      e += std::abs(grid.value(i, j) - true_density(truth, c));
    }
  return e * grid.cell_area();
}

DensityGrid density_from_embedding(const PointCloud &embedding,
                                   const PointCloud *reference,
                                   const TvMpleConfig &config) {
  require(embedding.dim() == 2, ErrorKind::kInvalidInput,
          "density estimation is 2D only");
  TvMpleConfig cfg = config;
  Eigen::MatrixXd x;
  if (reference) {
    x = procrustes_fit(*reference, embedding).apply(embedding.coords());
    if (!cfg.domain)
      cfg.domain = bounding_box(*reference);
  } else {
    const Eigen::Vector2d lo = embedding.coords().rowwise().minCoeff();
    const double extent =
        (embedding.coords().rowwise().maxCoeff() - lo).maxCoeff();
    require(extent > 0, ErrorKind::kDegenerateInput,
            "embedding has zero extent");
    x = (embedding.coords().colwise() - lo) / extent;
    if (!cfg.domain)
      cfg.domain = Box{};
  }
  return tv_mple(PointCloud(std::move(x)), cfg);
}

void write_density_csv(std::ostream &out, const DensityGrid &grid) {
  const int g = grid.resolution();
  out << header(grid) << " rows=top-to-bottom\n";
  out << std::setprecision(17);
  for (int j = g - 1; j >= 0; --j) {
    for (int i = 0; i < g; ++i)
      out << (i ? "," : "") << grid.value(i, j);
    out << '\n';
  }
}

void write_density_pgm(std::ostream &out, const DensityGrid &grid) {
  const int g = grid.resolution();
  const double top = grid.value.maxCoeff();
  out << "P5\n" << header(grid) << "\n# max=" << std::setprecision(17) << top
      << "\n" << g << ' ' << g << "\n65535\n";
  for (int j = g - 1; j >= 0; --j)
    for (int i = 0; i < g; ++i) {
      const double t = top > 0 ? grid.value(i, j) / top : 0.0;
      const auto v = static_cast<std::uint16_t>(std::lround(65535.0 * t));
      out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xff));
    }
}

void save_density(const std::filesystem::path &stem, const DensityGrid &grid) {
  std::filesystem::path csv = stem, pgm = stem;
  csv += ".csv";
  pgm += ".pgm";
  std::ofstream a(csv);
  require(static_cast<bool>(a), ErrorKind::kInvalidInput,
          "cannot write " + csv.string());
  write_density_csv(a, grid);
  std::ofstream b(pgm, std::ios::binary);
  require(static_cast<bool>(b), ErrorKind::kInvalidInput,
          "cannot write " + pgm.string());
  write_density_pgm(b, grid);
}

} // namespace ordembed
