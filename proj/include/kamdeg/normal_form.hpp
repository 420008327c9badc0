#pragma once

#include "kamdeg/series.hpp"

#include <string>
#include <vector>

namespace kamdeg {

// N = e + <omega,y> + h_tilde(y) + g(z) + g_bar(y,z), with accumulated shift zeta.
struct NormalForm {
  double e = 0.0;
  Vec omega;
  TFSeries h_tilde;
  TFSeries g;
  TFSeries g_bar;
  Vec zeta;

  int n() const { return static_cast<int>(omega.size()); }
  int d() const { return static_cast<int>(zeta.size()) / 2; }
};

// Builds a normal form with zero series pieces of matching dimensions.
NormalForm make_normal_form(const Vec& omega, int d, Caps caps);

TFSeries to_series(const NormalForm& nf, Caps caps);

// Human-readable list of shape violations; empty when all hold to tol.
// Rules: h_tilde is y-only with |iota| >= 2, g is z-only without constant or
// linear part, g_bar is mixed with 2|iota|+|j| <= m.
std::vector<std::string> shape_violations(const NormalForm& nf, int m, double tol);

// Hessian at z = 0 of the z-only part of g.
Mat hessian_at_origin(const TFSeries& g);

// Gradient and Hessian in z of the k = 0, y-free part of f at a point z.
Vec z_gradient(const TFSeries& f, const Vec& z);
Mat z_hessian(const TFSeries& f, const Vec& z);

// The y-free, mode-zero part of f as a function of z only.
TFSeries z_part_at_origin(const TFSeries& f);

}  // namespace kamdeg
