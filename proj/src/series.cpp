#include "kamdeg/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace kamdeg {

namespace {

constexpr double kDropFloor = 1e-300;

void require_same_dims(const TFSeries& f, const TFSeries& g, const char* op) {
  if (f.n() != g.n() || f.d() != g.d()) {
    throw DimensionError(std::string(op) + ": dimension mismatch (n,d) = (" +
                         std::to_string(f.n()) + "," + std::to_string(f.d()) + ") vs (" +
                         std::to_string(g.n()) + "," + std::to_string(g.d()) + ")");
  }
}

MultiIndex add_indices(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex out;
  for (int i = 0; i < kMaxSlots; ++i) out.v[i] = static_cast<std::int16_t>(a.v[i] + b.v[i]);
  return out;
}

bool term_less(const Term& a, const Term& b) { return a.idx < b.idx; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t MultiIndexHash::operator()(const MultiIndex& m) const noexcept {
  std::uint64_t w[4];
  std::memcpy(w, m.v.data(), sizeof(w));
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t x : w) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

MultiIndex make_index(const std::vector<int>& k, const std::vector<int>& iota,
                      const std::vector<int>& j) {
  const std::size_t n = k.size();
  if (iota.size() != n) throw DimensionError("make_index: iota length differs from k length");
  if (j.size() % 2 != 0) throw DimensionError("make_index: z exponent vector must have even length");
  if (2 * n + j.size() > static_cast<std::size_t>(kMaxSlots)) {
    throw DimensionError("make_index: 2n + 2d exceeds " + std::to_string(kMaxSlots));
  }
  MultiIndex m;
  for (std::size_t i = 0; i < n; ++i) {
    if (iota[i] < 0) throw std::invalid_argument("make_index: negative y exponent");
    m.v[i] = static_cast<std::int16_t>(k[i]);
    m.v[n + i] = static_cast<std::int16_t>(iota[i]);
  }
  for (std::size_t a = 0; a < j.size(); ++a) {
    if (j[a] < 0) throw std::invalid_argument("make_index: negative z exponent");
    m.v[2 * n + a] = static_cast<std::int16_t>(j[a]);
  }
  return m;
}

int mode_norm(const MultiIndex& m, int n) {
  int s = 0;
  for (int i = 0; i < n; ++i) s += std::abs(m.v[i]);
  return s;
}

int y_degree(const MultiIndex& m, int n) {
  int s = 0;
  for (int i = 0; i < n; ++i) s += m.v[n + i];
  return s;
}

int z_degree(const MultiIndex& m, int n, int d) {
  int s = 0;
  for (int a = 0; a < 2 * d; ++a) s += m.v[2 * n + a];
  return s;
}

bool is_zero_mode(const MultiIndex& m, int n) {
  for (int i = 0; i < n; ++i)
    if (m.v[i] != 0) return false;
  return true;
}

MultiIndex conjugate_index(const MultiIndex& m, int n) {
  MultiIndex out = m;
  for (int i = 0; i < n; ++i) out.v[i] = static_cast<std::int16_t>(-m.v[i]);
  return out;
}

Caps max_caps(Caps a, Caps b) { return {std::max(a.k_max, b.k_max), std::max(a.w_max, b.w_max)}; }

void check_domain(const DomainParams& dom) {
  if (!(dom.s > 0.0 && dom.s < 1.0) || !(dom.r > 0.0 && dom.r < 1.0)) {
    throw std::invalid_argument("domain requires 0 < s < 1 and 0 < r < 1, got s=" +
                                format_double(dom.s) + " r=" + format_double(dom.r));
  }
}

// ---------------------------------------------------------------- TFSeries

TFSeries::TFSeries(int n, int d, Caps caps) : n_(n), d_(d), caps_(caps) {
  if (n < 1 || d < 0 || 2 * n + 2 * d > kMaxSlots) {
    throw DimensionError("TFSeries: unsupported dimensions n=" + std::to_string(n) +
                         " d=" + std::to_string(d));
  }
}

TFSeries TFSeries::from_terms(int n, int d, Caps caps, std::vector<Term> terms) {
  TFSeries out(n, d, caps);
  std::sort(terms.begin(), terms.end(), term_less);
  std::vector<Term>& dst = out.terms_;
  dst.reserve(terms.size());
  for (std::size_t i = 0; i < terms.size();) {
    Complex c = terms[i].c;
    std::size_t j = i + 1;
    while (j < terms.size() && terms[j].idx == terms[i].idx) c += terms[j++].c;
    if (std::abs(c) >= kDropFloor && out.admissible(terms[i].idx)) dst.push_back({terms[i].idx, c});
    i = j;
  }
  return out;
}

TFSeries TFSeries::constant(int n, int d, Caps caps, double c) {
  return from_terms(n, d, caps, {{MultiIndex{}, Complex(c, 0.0)}});
}

TFSeries TFSeries::monomial(int n, int d, Caps caps, const MultiIndex& idx, Complex c) {
  return from_terms(n, d, caps, {{idx, c}});
}

Complex TFSeries::coeff(const MultiIndex& idx) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), Term{idx, {}}, term_less);
  if (it != terms_.end() && it->idx == idx) return it->c;
  return {0.0, 0.0};
}

bool TFSeries::admissible(const MultiIndex& idx) const {
  return kamdeg::mode_norm(idx, n_) <= caps_.k_max &&
         kamdeg::weighted_degree(idx, n_, d_) <= caps_.w_max;
}

bool operator==(const TFSeries& a, const TFSeries& b) {
  if (a.n_ != b.n_ || a.d_ != b.d_ || a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (!(a.terms_[i].idx == b.terms_[i].idx) || a.terms_[i].c != b.terms_[i].c) return false;
  }
  return true;
}

// ------------------------------------------------------------ accumulator

SeriesAccumulator::SeriesAccumulator(int n, int d, Caps caps) : n_(n), d_(d), caps_(caps) {}

void SeriesAccumulator::add(const MultiIndex& idx, Complex c) {
  if (kamdeg::mode_norm(idx, n_) > caps_.k_max) return;
  if (kamdeg::weighted_degree(idx, n_, d_) > caps_.w_max) return;
  map_[idx] += c;
}

void SeriesAccumulator::add(const TFSeries& f, Complex scale) {
  for (const Term& t : f.terms()) add(t.idx, scale * t.c);
}

TFSeries SeriesAccumulator::finish() const {
  std::vector<Term> terms;
  terms.reserve(map_.size());
  for (const auto& [idx, c] : map_) terms.push_back({idx, c});
  return TFSeries::from_terms(n_, d_, caps_, std::move(terms));
}

// -------------------------------------------------------------- arithmetic

TFSeries add_scale(Complex a, const TFSeries& f, const TFSeries& g) {
  require_same_dims(f, g, "add_scale");
  std::vector<Term> terms;
  terms.reserve(f.size() + g.size());
  if (a != Complex(0.0, 0.0))
    for (const Term& t : f.terms()) terms.push_back({t.idx, a * t.c});
  for (const Term& t : g.terms()) terms.push_back(t);
  return TFSeries::from_terms(f.n(), f.d(), max_caps(f.caps(), g.caps()), std::move(terms));
}

TFSeries operator+(const TFSeries& f, const TFSeries& g) { return add_scale(1.0, f, g); }

TFSeries operator-(const TFSeries& f, const TFSeries& g) { return add_scale(-1.0, g, f); }

TFSeries operator-(const TFSeries& f) { return Complex(-1.0) * f; }

TFSeries operator*(Complex a, const TFSeries& f) {
  std::vector<Term> terms;
  terms.reserve(f.size());
  for (const Term& t : f.terms()) terms.push_back({t.idx, a * t.c});
  return TFSeries::from_terms(f.n(), f.d(), f.caps(), std::move(terms));
}

TFSeries multiply(const TFSeries& f, const TFSeries& g, Caps caps) {
  require_same_dims(f, g, "multiply");
  const int n = f.n(), d = f.d();
  SeriesAccumulator acc(n, d, caps);
  for (const Term& a : f.terms()) {
    const int wa = weighted_degree(a.idx, n, d);
    for (const Term& b : g.terms()) {
      if (wa + weighted_degree(b.idx, n, d) > caps.w_max) continue;
      acc.add(add_indices(a.idx, b.idx), a.c * b.c);
    }
  }
  return acc.finish();
}

TFSeries partial_derivative(const TFSeries& f, Var var) {
  const int n = f.n(), d = f.d();
  const int limit = var.kind == VarKind::Z ? 2 * d : n;
  if (var.index < 0 || var.index >= limit) {
    throw std::out_of_range("partial_derivative: variable index " + std::to_string(var.index) +
                            " out of range");
  }
  std::vector<Term> terms;
  terms.reserve(f.size());
  for (const Term& t : f.terms()) {
    if (var.kind == VarKind::X) {
      const int k = t.idx.v[var.index];
      if (k != 0) terms.push_back({t.idx, Complex(0.0, k) * t.c});
      continue;
    }
    const int slot = var.kind == VarKind::Y ? n + var.index : 2 * n + var.index;
    const int e = t.idx.v[slot];
    if (e == 0) continue;
    MultiIndex idx = t.idx;
    idx.v[slot] = static_cast<std::int16_t>(e - 1);
    terms.push_back({idx, static_cast<double>(e) * t.c});
  }
  return TFSeries::from_terms(n, d, f.caps(), std::move(terms));
}

TFSeries poisson_bracket(const TFSeries& f, const TFSeries& g, Caps caps) {
  require_same_dims(f, g, "poisson_bracket");
  const int n = f.n(), d = f.d();
  SeriesAccumulator acc(n, d, caps);

  // g sorted by weighted degree so the inner loop can stop early.
  std::vector<std::pair<int, const Term*>> gs;
  gs.reserve(g.size());
  for (const Term& t : g.terms()) gs.push_back({weighted_degree(t.idx, n, d), &t});
  std::stable_sort(gs.begin(), gs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  for (const Term& a : f.terms()) {
    const int wa = weighted_degree(a.idx, n, d);
    for (const auto& [wb, bp] : gs) {
      if (wa + wb - 2 > caps.w_max) break;
      const Term& b = *bp;
      const MultiIndex sum = add_indices(a.idx, b.idx);
      const Complex cc = a.c * b.c;
      for (int i = 0; i < n; ++i) {
        const int mix = a.idx.v[i] * b.idx.v[n + i] - a.idx.v[n + i] * b.idx.v[i];
        if (mix == 0) continue;
        MultiIndex idx = sum;
        idx.v[n + i] -= 1;
        acc.add(idx, Complex(0.0, mix) * cc);
      }
      for (int p = 0; p < d; ++p) {
        const int us = 2 * n + p, vs = 2 * n + d + p;
        const int mix = a.idx.v[us] * b.idx.v[vs] - a.idx.v[vs] * b.idx.v[us];
        if (mix == 0) continue;
        MultiIndex idx = sum;
        idx.v[us] -= 1;
        idx.v[vs] -= 1;
        acc.add(idx, static_cast<double>(mix) * cc);
      }
    }
  }
  return acc.finish();
}

Truncation truncate(const TFSeries& p, int k_plus, int m) {
  if (k_plus < 1) throw std::invalid_argument("truncate: K_plus must be >= 1");
  if (m < 2) throw std::invalid_argument("truncate: m must be >= 2");
  auto keep = [&](const MultiIndex& idx) {
    return p.mode_norm(idx) <= k_plus && p.weighted_degree(idx) <= m;
  };
  return {filter(p, keep), filter(p, [&](const MultiIndex& idx) { return !keep(idx); })};
}

TFSeries average(const TFSeries& r) {
  const int n = r.n();
  return filter(r, [n](const MultiIndex& idx) { return is_zero_mode(idx, n); });
}

TFSeries filter(const TFSeries& f, const std::function<bool(const MultiIndex&)>& pred) {
  std::vector<Term> terms;
  for (const Term& t : f.terms())
    if (pred(t.idx)) terms.push_back(t);
  return TFSeries::from_terms(f.n(), f.d(), f.caps(), std::move(terms));
}

TFSeries with_caps(const TFSeries& f, Caps caps) {
  return TFSeries::from_terms(f.n(), f.d(), caps, f.terms());
}

TFSeries shift_z(const TFSeries& f, const Vec& delta, Caps caps) {
  const int n = f.n(), d = f.d();
  if (delta.size() != 2 * d) throw DimensionError("shift_z: delta must have length 2d");
  if (!delta.allFinite()) throw std::invalid_argument("shift_z: delta must be finite");
  SeriesAccumulator acc(n, d, caps);
  std::vector<std::vector<double>> binom;

  auto choose = [&binom](int a, int b) {
    while (static_cast<int>(binom.size()) <= a) {
      const int row = static_cast<int>(binom.size());
      std::vector<double> next(row + 1, 1.0);
      for (int i = 1; i < row; ++i) next[i] = binom[row - 1][i - 1] + binom[row - 1][i];
      binom.push_back(std::move(next));
    }
    return binom[a][b];
  };

  for (const Term& t : f.terms()) {
    // Expand prod_a (z_a + delta_a)^{j_a} slot by slot.
    std::vector<Term> partial{{t.idx, t.c}};
    for (int a = 0; a < 2 * d; ++a) {
      const int slot = 2 * n + a;
      const int e = t.idx.v[slot];
      if (e == 0 || delta[a] == 0.0) continue;
      std::vector<Term> next;
      next.reserve(partial.size() * (e + 1));
      for (const Term& q : partial) {
        double pw = 1.0;
        for (int l = e; l >= 0; --l) {
          MultiIndex idx = q.idx;
          idx.v[slot] = static_cast<std::int16_t>(l);
          next.push_back({idx, q.c * (choose(e, l) * pw)});
          pw *= delta[a];
        }
      }
      partial = std::move(next);
    }
    for (const Term& q : partial) acc.add(q.idx, q.c);
  }
  return acc.finish();
}

double weighted_norm(const TFSeries& f, double s, double r) {
  double total = 0.0;
  for (const Term& t : f.terms()) {
    total += std::abs(t.c) * std::pow(s, f.weighted_degree(t.idx)) *
             std::exp(f.mode_norm(t.idx) * r);
  }
  return total;
}

double majorant_norm(const TFSeries& f, const DomainParams& dom) {
  check_domain(dom);
  return weighted_norm(f, dom.s, dom.r);
}

TFSeries enforce_reality(const TFSeries& f) {
  std::vector<Term> terms;
  terms.reserve(f.size());
  for (const Term& t : f.terms()) {
    const Complex partner = std::conj(f.coeff(conjugate_index(t.idx, f.n())));
    terms.push_back({t.idx, 0.5 * (t.c + partner)});
  }
  // Terms whose partner is missing still need the partner added.
  for (const Term& t : f.terms()) {
    const MultiIndex ci = conjugate_index(t.idx, f.n());
    if (f.coeff(ci) == Complex(0.0, 0.0)) terms.push_back({ci, 0.5 * std::conj(t.c)});
  }
  return TFSeries::from_terms(f.n(), f.d(), f.caps(), std::move(terms));
}

double reality_defect(const TFSeries& f) {
  double worst = 0.0;
  for (const Term& t : f.terms()) {
    const Complex partner = std::conj(f.coeff(conjugate_index(t.idx, f.n())));
    worst = std::max(worst, std::abs(t.c - partner));
  }
  return worst;
}

// ------------------------------------------------------------- Lie series

TFSeries lie_series(const TFSeries& h, const TFSeries& f, Caps caps, int first, int shift,
                    const LieOptions& opts) {
  require_same_dims(h, f, "lie_series");
  if (opts.order_cap < 1) throw std::invalid_argument("lie_series: order_cap must be >= 1");
  double fact = 1.0;
  for (int i = 2; i <= shift; ++i) fact *= i;
  TFSeries cur = with_caps(Complex(1.0 / fact) * h, caps);
  SeriesAccumulator acc(h.n(), h.d(), caps);
  if (first == 0) acc.add(cur);
  const double ref = weighted_norm(cur, opts.dom.s, opts.dom.r);
  if (ref == 0.0 || f.empty()) return acc.finish();

  for (int q = 1;; ++q) {
    cur = poisson_bracket(cur, f, caps);
    cur = Complex(1.0 / (q + shift)) * cur;
    if (q >= first) acc.add(cur);
    const double nq = weighted_norm(cur, opts.dom.s, opts.dom.r);
    if (nq <= opts.floor * ref) break;
    if (q >= opts.order_cap) {
      throw LieSeriesError("Lie series did not converge by order " +
                           std::to_string(opts.order_cap) + " (relative term norm " +
                           format_double(nq / ref) + ")");
    }
  }
  return acc.finish();
}

TFSeries lie_transform(const TFSeries& h, const TFSeries& f, Caps caps, int order_cap,
                       const LieOptions& opts) {
  LieOptions o = opts;
  o.order_cap = order_cap;
  return lie_series(h, f, caps, 0, 0, o);
}

// ------------------------------------------------------------- evaluation

double evaluate_point(const TFSeries& f, const Vec& x, const Vec& y, const Vec& z) {
  const int n = f.n(), d = f.d();
  if (x.size() != n || y.size() != n || z.size() != 2 * d) {
    throw DimensionError("evaluate_point: argument lengths do not match series dimensions");
  }
  double total = 0.0;
  for (const Term& t : f.terms()) {
    double phase = 0.0;
    double mono = 1.0;
    for (int i = 0; i < n; ++i) {
      phase += t.idx.v[i] * x[i];
      if (t.idx.v[n + i]) mono *= std::pow(y[i], t.idx.v[n + i]);
    }
    for (int a = 0; a < 2 * d; ++a)
      if (t.idx.v[2 * n + a]) mono *= std::pow(z[a], t.idx.v[2 * n + a]);
    total += mono * (t.c.real() * std::cos(phase) - t.c.imag() * std::sin(phase));
  }
  return total;
}

// ---------------------------------------------------------- serialization

void write_series(std::ostream& os, const TFSeries& f) {
  const int n = f.n(), d = f.d();
  os << "TFS " << n << ' ' << d << ' ' << f.caps().k_max << ' ' << f.caps().w_max << '\n';
  for (const Term& t : f.terms()) {
    for (int i = 0; i < n; ++i) os << t.idx.v[i] << ' ';
    os << '|';
    for (int i = 0; i < n; ++i) os << ' ' << t.idx.v[n + i];
    os << " |";
    for (int a = 0; a < 2 * d; ++a) os << ' ' << t.idx.v[2 * n + a];
    os << " | " << format_double(t.c.real()) << ' ' << format_double(t.c.imag()) << '\n';
  }
}

namespace {

double parse_double(const std::string& tok, int line) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error("series line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  return v;
}

int parse_int(const std::string& tok, int line) {
  int v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error("series line " + std::to_string(line) + ": bad integer '" + tok + "'");
  }
  return v;
}

}  // namespace

TFSeries read_series(std::istream& is) {
  std::string line;
  int lineno = 0;
  int n = 0, d = 0;
  Caps caps{};
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream hs(line);
    std::string tag;
    hs >> tag >> n >> d >> caps.k_max >> caps.w_max;
    if (tag != "TFS" || !hs) throw Error("series line " + std::to_string(lineno) + ": expected header 'TFS n d Kmax wmax'");
    break;
  }
  if (n == 0) throw Error("series: missing header");
  std::vector<Term> terms;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string s; ls >> s;) tok.push_back(s);
    const std::size_t expect = static_cast<std::size_t>(2 * n + 2 * d + 2 + 3);
    if (tok.size() != expect || tok[n] != "|" || tok[2 * n + 1] != "|" ||
        tok[2 * n + 2 * d + 2] != "|") {
      throw Error("series line " + std::to_string(lineno) + ": malformed term");
    }
    std::vector<int> k(n), iota(n), j(2 * d);
    for (int i = 0; i < n; ++i) k[i] = parse_int(tok[i], lineno);
    for (int i = 0; i < n; ++i) iota[i] = parse_int(tok[n + 1 + i], lineno);
    for (int a = 0; a < 2 * d; ++a) j[a] = parse_int(tok[2 * n + 2 + a], lineno);
    const double re = parse_double(tok[expect - 2], lineno);
    const double im = parse_double(tok[expect - 1], lineno);
    terms.push_back({make_index(k, iota, j), Complex(re, im)});
  }
  return TFSeries::from_terms(n, d, caps, std::move(terms));
}

std::string to_string(const TFSeries& f) {
  std::ostringstream os;
  write_series(os, f);
  return os.str();
}

}  // namespace kamdeg
