#include "kamdeg/degree.hpp"

#include "kamdeg/normal_form.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

namespace kamdeg {

namespace {

constexpr int kMaxBoundarySamples = 1 << 20;

void check_region(const BoxRegion& region, int dim_expected) {
  if (!(region.radius > 0.0)) throw std::invalid_argument("region radius must be > 0");
  if (dim_expected > 0 && region.center.size() != dim_expected) {
    throw DimensionError("region center has dimension " + std::to_string(region.center.size()) +
                         ", expected " + std::to_string(dim_expected));
  }
}

Vec circle_point(const BoxRegion& region, double theta) {
  Vec z(2);
  z << region.center[0] + region.radius * std::cos(theta), region.center[1] + region.radius * std::sin(theta);
  return z;
}

// N+1 vertices of a regular simplex centred at the origin of R^N (columns).
Mat regular_simplex(int dim) {
  Mat centred = Mat::Identity(dim + 1, dim + 1) - Mat::Constant(dim + 1, dim + 1, 1.0 / (dim + 1));
  Eigen::JacobiSVD<Mat> svd(centred, Eigen::ComputeFullU);
  // Coordinates of each vertex in the span of the leading singular vectors.
  Mat coords = svd.matrixU().leftCols(dim).transpose() * centred;
  return coords;
}

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

WindingResult winding_number_2d(const VectorMap& f, const BoxRegion& region) {
  check_region(region, 2);
  if (region.boundary_resolution < 64) throw std::invalid_argument("boundary_resolution must be >= 64");
  WindingResult res;
  for (int samples = region.boundary_resolution; samples <= kMaxBoundarySamples; samples *= 2) {
    std::vector<Vec> vals(samples);
    double min_norm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
      vals[i] = f(circle_point(region, 2.0 * M_PI * i / samples));
      if (vals[i].size() != 2) throw DimensionError("winding_number_2d: map must return 2-vectors");
      min_norm = std::min(min_norm, vals[i].norm());
    }
    double max_step = 0.0;
    for (int i = 0; i < samples; ++i) max_step = std::max(max_step, (vals[(i + 1) % samples] - vals[i]).norm());
    res = {0, samples, min_norm, max_step};
    if (!(min_norm > 10.0 * max_step)) continue;
    double total = 0.0;
    for (int i = 0; i < samples; ++i) {
      const Vec& a = vals[i];
      const Vec& b = vals[(i + 1) % samples];
      total += std::atan2(a[0] * b[1] - a[1] * b[0], a.dot(b));
    }
    res.degree = static_cast<int>(std::lround(total / (2.0 * M_PI)));
    return res;
  }
  throw BoundaryZeroError("boundary zero: min |f| = " + format_double(res.min_norm) +
                          " does not exceed 10x the sample variation " + format_double(res.max_step) +
                          " at " + std::to_string(res.samples) + " samples");
}

int brouwer_degree_2d(const VectorMap& f, const BoxRegion& region) { return winding_number_2d(f, region).degree; }

int brouwer_degree_simplicial(const VectorMap& f, const BoxRegion& region, int cells_per_edge) {
  const int dim = static_cast<int>(region.center.size());
  check_region(region, 0);
  if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("brouwer_degree_simplicial: dimension must be even and >= 2");
  if (cells_per_edge < 1) throw std::invalid_argument("brouwer_degree_simplicial: cells_per_edge must be >= 1");
  const int M = cells_per_edge;
  const Mat simplex = regular_simplex(dim);

  // Labels of boundary lattice points, cached by their integer coordinates.
  std::unordered_map<std::int64_t, int> labels;
  auto key_of = [&](const std::vector<int>& g) {
    std::int64_t key = 0;
    for (int v : g) key = key * (M + 1) + v;
    return key;
  };
  auto cube_point = [&](const std::vector<int>& g) {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) x[a] = -1.0 + 2.0 * g[a] / M;
    return x;
  };
  auto label_of = [&](const std::vector<int>& g) {
    const std::int64_t key = key_of(g);
    auto it = labels.find(key);
    if (it != labels.end()) return it->second;
    const Vec x = cube_point(g);
    const Vec y = f(region.center + region.radius * x / x.norm());
    if (y.size() != dim) throw DimensionError("brouwer_degree_simplicial: map has the wrong output dimension");
    if (!(y.norm() > 0.0)) throw BoundaryZeroError("brouwer_degree_simplicial: map vanishes on the boundary");
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= dim; ++i) {
      const double v = y.dot(simplex.col(i));
      if (v > best_val) {
        best_val = v;
        best = i;
      }
    }
    labels.emplace(key, best);
    return best;
  };

  std::vector<int> perm(dim - 1);
  int degree = 0;
  for (int axis = 0; axis < dim; ++axis) {
    for (int side : {0, M}) {
      std::vector<int> free_axes;
      for (int a = 0; a < dim; ++a)
        if (a != axis) free_axes.push_back(a);
      std::vector<int> cell(dim - 1, 0);
      while (true) {
        std::iota(perm.begin(), perm.end(), 0);
        do {
          // Kuhn simplex: walk from the cell corner one unit step at a time.
          std::vector<int> g(dim, 0);
          g[axis] = side;
          for (int q = 0; q < dim - 1; ++q) g[free_axes[q]] = cell[q];
          Mat pts(dim, dim), lv(dim, dim);
          std::vector<int> used(dim + 1, 0);
          bool full = true;
          for (int v = 0; v < dim; ++v) {
            if (v > 0) g[free_axes[perm[v - 1]]] += 1;
            pts.col(v) = cube_point(g);
            const int l = label_of(g);
            if (l == dim || used[l]) full = false;
            used[l] = 1;
            lv.col(v) = simplex.col(l);
          }
          if (full) degree += static_cast<int>(sign_of(pts.determinant()) * sign_of(lv.determinant()));
        } while (std::next_permutation(perm.begin(), perm.end()));
        int q = 0;
        while (q < dim - 1 && ++cell[q] == M) cell[q++] = 0;
        if (q == dim - 1) break;
      }
    }
  }
  return degree;
}

BorsukResult borsuk_odd_check(const VectorMap& f, const BoxRegion& region) {
  check_region(region, 0);
  const int dim = static_cast<int>(region.center.size());
  const int samples = std::max(64, region.boundary_resolution);
  BorsukResult res;
  res.min_norm = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int i = 0; i < samples; ++i) {
    Vec w(dim);
    if (dim == 2) {
      const double th = M_PI * i / samples;
      w << std::cos(th), std::sin(th);
    } else {
      for (int a = 0; a < dim; ++a) w[a] = normal(rng);
      w.normalize();
    }
    w *= region.radius;
    const Vec fp = f(region.center + w), fm = f(region.center - w);
    const double np = fp.norm();
    res.min_norm = std::min({res.min_norm, np, fm.norm()});
    max_norm = std::max({max_norm, np, fm.norm()});
    const double defect = np > 0.0 ? (fp + fm).norm() / np : std::numeric_limits<double>::infinity();
    if (defect >= res.worst_defect) {
      res.worst_defect = defect;
      res.witness = region.center + w;
    }
  }
  res.pass = res.worst_defect <= 1e-9 && res.min_norm > 1e-8 * max_norm && res.min_norm > 0.0;
  return res;
}

ConvexityCert estimate_convexity(const VectorMap& g_grad, const BoxRegion& region, int samples, std::uint64_t seed) {
  check_region(region, 0);
  if (samples < 1000) throw std::invalid_argument("estimate_convexity: samples must be >= 1000");
  const int dim = static_cast<int>(region.center.size());
  const double rho = region.radius;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;

  auto random_direction = [&]() {
    Vec w(dim);
    for (int a = 0; a < dim; ++a) w[a] = normal(rng);
    return Vec(w.normalized());
  };
  auto random_in_ball = [&]() { return Vec(region.center + rho * std::pow(unit(rng), 1.0 / dim) * random_direction()); };

  ConvexityCert cert;
  struct Pair {
    Vec a, b;
    double dist, diff;
  };
  std::vector<Pair> pairs;
  pairs.reserve(samples);
  auto record = [&](const Vec& a, const Vec& b, double diff) {
    pairs.push_back({a, b, (a - b).norm(), diff});
  };

  // Anchored sweeps: fixed directions and log-spaced radii around each anchor.
  constexpr int kRadii = 16, kDirs = 16;
  const int anchored_budget = samples / 2;
  const int anchors = std::max(1, anchored_budget / (kRadii * kDirs));
  std::vector<Vec> dirs(kDirs);
  for (int q = 0; q < kDirs; ++q) {
    if (dim == 2) {
      const double th = 2.0 * M_PI * (q + 0.5) / kDirs;
      dirs[q] = Vec(2);
      dirs[q] << std::cos(th), std::sin(th);
    } else {
      dirs[q] = random_direction();
    }
  }
  const double t_lo = 1e-3 * rho, t_hi = rho;
  double best_slope = -std::numeric_limits<double>::infinity();
  for (int an = 0; an < anchors; ++an) {
    const Vec anchor = an == 0 ? Vec(region.center) : random_in_ball();
    const Vec g0 = g_grad(anchor);
    std::vector<double> xs, ys;
    for (int ri = 0; ri < kRadii; ++ri) {
      const double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(ri) / (kRadii - 1));
      double lowest = std::numeric_limits<double>::infinity();
      for (const Vec& w : dirs) {
        const Vec z = anchor + t * w;
        if ((z - region.center).norm() > rho) continue;
        const double diff = (g_grad(z) - g0).norm();
        record(z, anchor, diff);
        if (diff > 0.0) lowest = std::min(lowest, std::log(diff));
      }
      if (std::isfinite(lowest)) {
        xs.push_back(std::log(t));
        ys.push_back(lowest);
      }
    }
    if (xs.size() < 3) continue;
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    best_slope = std::max(best_slope, sxy / sxx);
  }

  // Unstructured pairs spread the minimum-ratio search over the whole ball.
  while (static_cast<int>(pairs.size()) < samples) {
    const Vec a = random_in_ball(), b = random_in_ball();
    record(a, b, (g_grad(a) - g_grad(b)).norm());
  }

  if (!std::isfinite(best_slope) ||
      std::all_of(pairs.begin(), pairs.end(), [](const Pair& p) { return p.diff == 0.0; })) {
    throw DegenerateFitError("estimate_convexity: gradient differences vanish on all samples");
  }
  cert.L = best_slope;
  cert.sample_count = static_cast<int>(pairs.size());
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const Pair& p : pairs) {
    if (p.dist <= 0.0) continue;
    const double ratio = p.diff / std::pow(p.dist, cert.L);
    if (ratio < min_ratio) {
      min_ratio = ratio;
      cert.min_ratio_witness = {p.a, p.b};
    }
  }
  cert.sigma = 0.5 * min_ratio;
  cert.accepted = cert.sigma > 0.0 && cert.L >= 2.0;
  return cert;
}

A0Certificate check_A0(const TFSeries& g, const BoxRegion& region, int samples, std::uint64_t seed) {
  const int d = g.d();
  check_region(region, 2 * d);
  const Vec grad0 = z_gradient(g, region.center);
  if (grad0.norm() > 1e-12) {
    throw std::invalid_argument("check_A0: grad g at the region centre is " + format_double(grad0.norm()) +
                                ", expected 0");
  }
  const VectorMap f = [&g, grad0](const Vec& z) { return Vec(z_gradient(g, z) - grad0); };
  A0Certificate cert;
  if (d == 1) {
    cert.degree = brouwer_degree_2d(f, region);
    cert.degree_method = "boundary winding";
  } else {
    cert.degree = brouwer_degree_simplicial(f, region, 8);
    cert.degree_method = "labelled boundary triangulation";
  }
  cert.borsuk = borsuk_odd_check(f, region);
  cert.convexity = estimate_convexity(f, region, samples, seed);
  cert.pass = cert.degree != 0 && cert.convexity.accepted;
  if (cert.degree == 0) {
    cert.message = "degree of grad g is 0: the shift equation need not have a real solution "
                   "(the cubic counterexample mechanism), nondegeneracy fails";
  } else if (!cert.convexity.accepted) {
    cert.message = "convexity exponent L = " + format_double(cert.convexity.L) + " is below 2, nondegeneracy fails";
  } else {
    cert.message = "nondegenerate: degree " + std::to_string(cert.degree) + ", L = " + format_double(cert.convexity.L);
  }
  return cert;
}

}  // namespace kamdeg
