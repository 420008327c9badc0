#pragma once

#include "kamdeg/common.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <unordered_map>
#include <vector>

namespace kamdeg {

inline constexpr int kMaxSlots = 16;

// Packed (k | iota | j) exponent vector. Slots past 2n+2d stay zero.
// z = (u_1..u_d, v_1..v_d), so j holds the u exponents first.
struct MultiIndex {
  std::array<std::int16_t, kMaxSlots> v{};

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& m) const noexcept;
};

MultiIndex make_index(const std::vector<int>& k, const std::vector<int>& iota,
                      const std::vector<int>& j);

int mode_norm(const MultiIndex& m, int n);
int y_degree(const MultiIndex& m, int n);
int z_degree(const MultiIndex& m, int n, int d);
inline int weighted_degree(const MultiIndex& m, int n, int d) {
  return 2 * y_degree(m, n) + z_degree(m, n, d);
}
bool is_zero_mode(const MultiIndex& m, int n);
// Index with the mode negated (the conjugate partner).
MultiIndex conjugate_index(const MultiIndex& m, int n);

struct Caps {
  int k_max = 0;  // bound on |k|
  int w_max = 0;  // bound on 2|iota| + |j|

  static Caps ample() { return {4096, 4096}; }
  friend bool operator==(const Caps&, const Caps&) = default;
};

Caps max_caps(Caps a, Caps b);

struct DomainParams {
  double s = 0.5;
  double r = 0.5;
};

// Throws std::invalid_argument unless 0 < s < 1 and 0 < r < 1.
void check_domain(const DomainParams& dom);

struct Term {
  MultiIndex idx;
  Complex c;
};

enum class VarKind { X, Y, Z };

struct Var {
  VarKind kind;
  int index;
  static Var x(int i) { return {VarKind::X, i}; }
  static Var y(int i) { return {VarKind::Y, i}; }
  static Var z(int a) { return {VarKind::Z, a}; }
};

// Truncated Taylor-Fourier series sum c e^{i<k,x>} y^iota z^j in canonical
// sparse form: sorted by index, no zero coefficients, everything within caps.
class TFSeries {
 public:
  TFSeries() = default;
  TFSeries(int n, int d, Caps caps);

  // Sums duplicates, drops |c| < 1e-300 and indices outside caps, sorts.
  static TFSeries from_terms(int n, int d, Caps caps, std::vector<Term> terms);
  static TFSeries constant(int n, int d, Caps caps, double c);
  static TFSeries monomial(int n, int d, Caps caps, const MultiIndex& idx, Complex c);

  int n() const { return n_; }
  int d() const { return d_; }
  Caps caps() const { return caps_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  Complex coeff(const MultiIndex& idx) const;
  bool admissible(const MultiIndex& idx) const;

  int mode_norm(const MultiIndex& m) const { return kamdeg::mode_norm(m, n_); }
  int weighted_degree(const MultiIndex& m) const {
    return kamdeg::weighted_degree(m, n_, d_);
  }

  friend bool operator==(const TFSeries& a, const TFSeries& b);

 private:
  int n_ = 0;
  int d_ = 0;
  Caps caps_{};
  std::vector<Term> terms_;
};

// Hash-map accumulation used by every bilinear operation.
class SeriesAccumulator {
 public:
  SeriesAccumulator(int n, int d, Caps caps);
  void add(const MultiIndex& idx, Complex c);
  void add(const TFSeries& f, Complex scale = 1.0);
  TFSeries finish() const;

 private:
  int n_, d_;
  Caps caps_;
  std::unordered_map<MultiIndex, Complex, MultiIndexHash> map_;
};

TFSeries add_scale(Complex a, const TFSeries& f, const TFSeries& g);
TFSeries operator+(const TFSeries& f, const TFSeries& g);
TFSeries operator-(const TFSeries& f, const TFSeries& g);
TFSeries operator-(const TFSeries& f);
TFSeries operator*(Complex a, const TFSeries& f);

TFSeries multiply(const TFSeries& f, const TFSeries& g, Caps caps);
TFSeries partial_derivative(const TFSeries& f, Var var);
// {F,G} = sum_i (F_{x_i} G_{y_i} - F_{y_i} G_{x_i}) + F_z J G_z, J = [[0,I],[-I,0]].
TFSeries poisson_bracket(const TFSeries& f, const TFSeries& g, Caps caps);

struct Truncation {
  TFSeries R;
  TFSeries tail;
};
Truncation truncate(const TFSeries& p, int k_plus, int m);
TFSeries average(const TFSeries& r);
TFSeries shift_z(const TFSeries& f, const Vec& delta, Caps caps);

// Keeps the terms whose index satisfies pred; caps unchanged.
TFSeries filter(const TFSeries& f, const std::function<bool(const MultiIndex&)>& pred);
// Re-truncates to new caps.
TFSeries with_caps(const TFSeries& f, Caps caps);

double majorant_norm(const TFSeries& f, const DomainParams& dom);
// Same weights without the domain range check (r = 0 gives the y,z-only weight).
double weighted_norm(const TFSeries& f, double s, double r);

// Averages each conjugate pair so the series is exactly real-valued.
TFSeries enforce_reality(const TFSeries& f);
double reality_defect(const TFSeries& f);

struct LieSeriesError : Error {
  using Error::Error;
};

struct LieOptions {
  int order_cap = 40;
  double floor = 1e-18;  // stop once a term's norm is below floor * norm of the first
  DomainParams dom{0.5, 0.5};
};

// sum_{q>=0} ad_F^q H / q!, ad_F H = {H,F}.
TFSeries lie_transform(const TFSeries& h, const TFSeries& f, Caps caps, int order_cap,
                       const LieOptions& opts = {});
// sum_{q>=first} ad_F^q H / (q+shift)!; shift = 0, first = 0 is lie_transform.
TFSeries lie_series(const TFSeries& h, const TFSeries& f, Caps caps, int first, int shift,
                    const LieOptions& opts);

double evaluate_point(const TFSeries& f, const Vec& x, const Vec& y, const Vec& z);

void write_series(std::ostream& os, const TFSeries& f);
TFSeries read_series(std::istream& is);
std::string to_string(const TFSeries& f);

}  // namespace kamdeg
