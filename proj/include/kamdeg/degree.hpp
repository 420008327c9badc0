#pragma once

#include "kamdeg/series.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

namespace kamdeg {

// A continuous map R^N -> R^N given pointwise.
using VectorMap = std::function<Vec(const Vec&)>;

// The closed ball of the given radius about center.
struct BoxRegion {
  Vec center;
  double radius = 1.0;
  int boundary_resolution = 1024;
};

struct BoundaryZeroError : Error {
  using Error::Error;
};

struct DegenerateFitError : Error {
  using Error::Error;
};

struct WindingResult {
  int degree = 0;
  int samples = 0;        // boundary samples after refinement
  double min_norm = 0.0;  // smallest sampled |f|
  double max_step = 0.0;  // largest adjacent-sample difference
};

// Winding number of f along the positively oriented boundary circle.
WindingResult winding_number_2d(const VectorMap& f, const BoxRegion& region);
int brouwer_degree_2d(const VectorMap& f, const BoxRegion& region);

// Degree in any even dimension from a labelled triangulation of the boundary
// of the cube inscribed in the region, radially projected onto the sphere.
// cells_per_edge subdivides each facet edge.
int brouwer_degree_simplicial(const VectorMap& f, const BoxRegion& region, int cells_per_edge);

struct BorsukResult {
  bool pass = false;
  double worst_defect = 0.0;  // max |f(c+w) + f(c-w)| / |f(c+w)|
  double min_norm = 0.0;
  Vec witness;                // boundary point attaining the worst defect
};

BorsukResult borsuk_odd_check(const VectorMap& f, const BoxRegion& region);

struct ConvexityCert {
  double sigma = 0.0;
  double L = 0.0;
  int sample_count = 0;
  std::pair<Vec, Vec> min_ratio_witness;
  bool accepted = false;  // sigma > 0 and L >= 2
};

// Empirical exponent L (largest lower-envelope slope of log|grad g(z) - grad g(z*)|
// against log|z - z*| over the sampled anchors) and sigma = half the smallest
// observed |grad g(z) - grad g(z*)| / |z - z*|^L.
ConvexityCert estimate_convexity(const VectorMap& g_grad, const BoxRegion& region, int samples,
                                 std::uint64_t seed = 1);

struct A0Certificate {
  int degree = 0;
  std::string degree_method;
  BorsukResult borsuk;
  ConvexityCert convexity;
  bool pass = false;
  std::string message;
};

// Nondegeneracy of the normal part: nonzero degree of grad g - grad g(center) and L >= 2.
A0Certificate check_A0(const TFSeries& g, const BoxRegion& region, int samples = 10000,
                       std::uint64_t seed = 1);

}  // namespace kamdeg
