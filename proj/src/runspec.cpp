#include "kamdeg/runspec.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace kamdeg {

SpecError::SpecError(int line, int column, const std::string& message)
    : Error("spec:" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line(line),
      column(column) {}

namespace {

struct Token {
  std::string text;
  int col = 0;
};

struct Line {
  int no = 0;
  std::vector<Token> toks;
};

std::vector<Token> tokenize(const std::string& raw) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t end = std::min(raw.find('#'), raw.size());
  while (i < end) {
    const char c = raw[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == '|' || c == '=') {
      out.push_back({std::string(1, c), static_cast<int>(i) + 1});
      ++i;
    } else {
      const std::size_t start = i;
      while (i < end && raw[i] != ' ' && raw[i] != '\t' && raw[i] != '\r' && raw[i] != '|' && raw[i] != '=') ++i;
      out.push_back({raw.substr(start, i - start), static_cast<int>(start) + 1});
    }
  }
  return out;
}

double to_double(const Line& ln, const Token& t) {
  double v = 0.0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw SpecError(ln.no, t.col, "expected a number, got '" + t.text + "'");
  return v;
}

long long to_integer(const Line& ln, const Token& t) {
  long long v = 0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw SpecError(ln.no, t.col, "expected an integer, got '" + t.text + "'");
  return v;
}

int to_int(const Line& ln, const Token& t) {
  const long long v = to_integer(ln, t);
  if (v < -1000000000LL || v > 1000000000LL) throw SpecError(ln.no, t.col, "integer out of range");
  return static_cast<int>(v);
}

bool to_bool(const Line& ln, const Token& t) {
  if (t.text == "true") return true;
  if (t.text == "false") return false;
  throw SpecError(ln.no, t.col, "expected true or false, got '" + t.text + "'");
}

struct KeyValue {
  const Line* line;
  Token key;
  std::vector<Token> values;

  const Token& single() const {
    if (values.size() != 1)
      throw SpecError(line->no, key.col, "key '" + key.text + "' takes one value, got " + std::to_string(values.size()));
    return values.front();
  }
  double number() const { return to_double(*line, single()); }
  int integer() const { return to_int(*line, single()); }
  bool flag() const { return to_bool(*line, single()); }
  Vec vec() const {
    if (values.empty()) throw SpecError(line->no, key.col, "key '" + key.text + "' needs at least one value");
    Vec v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(*line, values[i]);
    return v;
  }
};

KeyValue split_key_value(const Line& ln) {
  if (ln.toks.size() < 2 || ln.toks[1].text != "=")
    throw SpecError(ln.no, ln.toks.front().col, "expected 'key = value'");
  KeyValue kv{&ln, ln.toks[0], {}};
  for (std::size_t i = 2; i < ln.toks.size(); ++i) {
    if (ln.toks[i].text == "=" || ln.toks[i].text == "|")
      throw SpecError(ln.no, ln.toks[i].col, "unexpected '" + ln.toks[i].text + "'");
    kv.values.push_back(ln.toks[i]);
  }
  return kv;
}

// Groups of tokens between '|' separators.
std::vector<std::vector<Token>> split_bars(const Line& ln) {
  std::vector<std::vector<Token>> groups(1);
  for (const Token& t : ln.toks) {
    if (t.text == "|") groups.emplace_back();
    else if (t.text == "=") throw SpecError(ln.no, t.col, "unexpected '=' in a coefficient row");
    else groups.back().push_back(t);
  }
  return groups;
}

struct SeriesRow {
  std::string section;
  int line = 0;
  int col = 0;
  std::vector<int> k, iota, j;
  Complex c;
};

SeriesRow parse_series_row(const std::string& section, const Line& ln) {
  const auto groups = split_bars(ln);
  if (groups.size() != 4)
    throw SpecError(ln.no, ln.toks.front().col, "coefficient row needs 'k | iota | j | re [im]', got " +
                                                    std::to_string(groups.size()) + " groups");
  SeriesRow row{section, ln.no, ln.toks.front().col, {}, {}, {}, {}};
  for (const Token& t : groups[0]) row.k.push_back(to_int(ln, t));
  for (const Token& t : groups[1]) row.iota.push_back(to_int(ln, t));
  for (const Token& t : groups[2]) row.j.push_back(to_int(ln, t));
  if (groups[3].empty() || groups[3].size() > 2)
    throw SpecError(ln.no, ln.toks.back().col, "coefficient needs a real part and an optional imaginary part");
  row.c = Complex(to_double(ln, groups[3][0]), groups[3].size() == 2 ? to_double(ln, groups[3][1]) : 0.0);
  for (int e : row.iota)
    if (e < 0) throw SpecError(ln.no, row.col, "action exponents must be nonnegative");
  for (int e : row.j)
    if (e < 0) throw SpecError(ln.no, row.col, "normal exponents must be nonnegative");
  return row;
}

bool canonical(const std::vector<int>& k) {
  for (int v : k)
    if (v != 0) return v > 0;
  return true;
}

TFSeries build_series(const std::vector<SeriesRow>& rows, const std::string& section, int n, int d) {
  std::map<MultiIndex, Complex> given;
  for (const SeriesRow& r : rows) {
    if (r.section != section) continue;
    given[make_index(r.k, r.iota, r.j)] += r.c;
  }
  std::vector<Term> terms;
  for (const auto& [idx, c] : given) {
    terms.push_back({idx, c});
    if (is_zero_mode(idx, n)) continue;
    const MultiIndex partner = conjugate_index(idx, n);
    if (!given.count(partner)) terms.push_back({partner, std::conj(c)});
  }
  return TFSeries::from_terms(n, d, Caps::ample(), std::move(terms));
}

const std::set<std::string> kSections = {"system",    "h_tilde", "g",     "perturbation",   "schedule",
                                         "region",    "omega_map", "torus", "counterexample", "output"};
const std::set<std::string> kTables = {"h_tilde", "g", "perturbation"};

void write_vec(std::ostream& os, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v[i]);
}

void write_table(std::ostream& os, const TFSeries& f) {
  const int n = f.n(), d = f.d();
  for (const Term& t : f.terms()) {
    std::vector<int> k(t.idx.v.begin(), t.idx.v.begin() + n);
    if (!canonical(k)) continue;
    for (int i = 0; i < n; ++i) os << t.idx.v[i] << ' ';
    os << '|';
    for (int i = 0; i < n; ++i) os << ' ' << t.idx.v[n + i];
    os << " |";
    for (int a = 0; a < 2 * d; ++a) os << ' ' << t.idx.v[2 * n + a];
    os << " | " << format_double(t.c.real()) << ' ' << format_double(t.c.imag()) << '\n';
  }
}

bool vec_equal(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.size() == 0 || a == b); }

}  // namespace

RunSpec parse_spec(std::istream& is) {
  RunSpec spec;
  std::vector<Line> lines;
  std::string raw;
  int no = 0;
  while (std::getline(is, raw)) {
    ++no;
    Line ln{no, tokenize(raw)};
    if (!ln.toks.empty()) lines.push_back(std::move(ln));
  }

  std::string section;
  std::set<std::string> seen;
  std::vector<SeriesRow> rows;
  std::optional<int> declared_n, declared_d, map_params;
  bool map_identity = false;
  std::vector<std::pair<const Line*, std::vector<std::vector<Token>>>> map_rows;
  std::optional<Vec> lo, hi;
  int lo_line = 0;
  int system_line = 0;

  for (const Line& ln : lines) {
    const Token& first = ln.toks.front();
    if (first.text.front() == '[') {
      if (ln.toks.size() != 1 || first.text.back() != ']' || first.text.size() < 3)
        throw SpecError(ln.no, first.col, "malformed section header");
      section = first.text.substr(1, first.text.size() - 2);
      if (!kSections.count(section)) throw SpecError(ln.no, first.col + 1, "unknown section '" + section + "'");
      if (!seen.insert(section).second) throw SpecError(ln.no, first.col, "duplicate section [" + section + "]");
      if (section == "system") system_line = ln.no;
      continue;
    }
    if (section.empty()) throw SpecError(ln.no, first.col, "entry outside any section");

    if (kTables.count(section)) {
      rows.push_back(parse_series_row(section, ln));
      continue;
    }
    if (section == "omega_map" && (ln.toks.size() < 2 || ln.toks[1].text != "=")) {
      map_rows.emplace_back(&ln, split_bars(ln));
      continue;
    }

    const KeyValue kv = split_key_value(ln);
    const std::string& key = kv.key.text;
    auto unknown = [&] { throw SpecError(ln.no, kv.key.col, "unknown key '" + key + "' in [" + section + "]"); };
    ScheduleConfig& sc = spec.schedule;
    if (section == "system") {
      if (key == "omega") spec.omega = kv.vec();
      else if (key == "n") declared_n = kv.integer();
      else if (key == "d") declared_d = kv.integer();
      else unknown();
    } else if (section == "schedule") {
      if (key == "epsilon") sc.epsilon = kv.number();
      else if (key == "m") sc.m = kv.integer();
      else if (key == "L") sc.L = kv.number();
      else if (key == "tau") sc.tau = kv.number();
      else if (key == "s") sc.s = kv.number();
      else if (key == "r") sc.r = kv.number();
      else if (key == "sigma") sc.sigma = kv.number();
      else if (key == "k_base") sc.k_base = kv.integer();
      else if (key == "max_steps") spec.max_steps = kv.integer();
      else if (key == "stop_norm") spec.stop_norm = kv.number();
      else if (key == "mode") {
        try {
          sc.mode = parse_schedule_mode(kv.single().text);
        } catch (const std::exception&) {
          throw SpecError(ln.no, kv.single().col, "mode must be paper or practical");
        }
      } else if (key == "c") {
        const Vec c = kv.vec();
        if (c.size() != 7) throw SpecError(ln.no, kv.key.col, "c takes the seven constants c0 .. c6");
        for (int i = 0; i < 7; ++i) sc.c[i] = c[i];
      } else {
        unknown();
      }
    } else if (section == "region") {
      if (key == "lo") {
        lo = kv.vec();
        lo_line = ln.no;
      } else if (key == "hi") {
        hi = kv.vec();
      } else if (key == "samples") {
        spec.samples = kv.integer();
      } else if (key == "seed") {
        const long long s = to_integer(ln, kv.single());
        if (s < 0) throw SpecError(ln.no, kv.single().col, "seed must be nonnegative");
        spec.seed = static_cast<std::uint64_t>(s);
      } else if (key == "epsilons") {
        const Vec e = kv.vec();
        spec.epsilons.assign(e.data(), e.data() + e.size());
      } else if (key == "steps") {
        spec.measure_steps = kv.integer();
      } else if (key == "M") {
        spec.jet_order = kv.integer();
      } else if (key == "a1_grid") {
        spec.a1_grid = kv.integer();
      } else if (key == "a1_directions") {
        spec.a1_directions = kv.integer();
      } else if (key == "a0_radius") {
        spec.a0_radius = kv.number();
      } else if (key == "a0_samples") {
        spec.a0_samples = kv.integer();
      } else {
        unknown();
      }
    } else if (section == "omega_map") {
      if (key == "params") map_params = kv.integer();
      else if (key == "identity") map_identity = kv.flag();
      else unknown();
    } else if (section == "torus") {
      if (key == "T") spec.torus_T = kv.number();
      else if (key == "h") spec.torus_h = kv.number();
      else if (key == "angles") spec.torus_angles = kv.integer();
      else if (key == "chain") spec.chain_torus = kv.flag();
      else unknown();
    } else if (section == "counterexample") {
      if (key == "epsilon") spec.cx_epsilon = kv.number();
      else if (key == "omega") spec.cx_omega = kv.number();
      else if (key == "T") spec.cx_T = kv.number();
      else if (key == "h") spec.cx_h = kv.number();
      else unknown();
    } else if (section == "output") {
      if (key == "dir") spec.out_dir = kv.single().text;
      else if (key == "dump_series") spec.dump_series = kv.flag();
      else unknown();
    }
  }

  // Dimensions: n from omega, d from [system] or the normal exponents.
  const int end_line = lines.empty() ? 1 : lines.back().no + 1;
  if (spec.omega.size() == 0)
    throw SpecError(system_line ? system_line : end_line, 1, "[system] needs omega = w_1 ... w_n");
  spec.n = static_cast<int>(spec.omega.size());
  if (declared_n && *declared_n != spec.n)
    throw DimensionError("[system] declares n = " + std::to_string(*declared_n) + " but omega has length " +
                         std::to_string(spec.n));
  std::optional<int> d_from_rows;
  for (const SeriesRow& r : rows) {
    const std::string where = "line " + std::to_string(r.line) + ": [" + r.section + "] row";
    if (static_cast<int>(r.k.size()) != spec.n)
      throw DimensionError(where + " has " + std::to_string(r.k.size()) + " Fourier indices but omega has length " +
                           std::to_string(spec.n));
    if (static_cast<int>(r.iota.size()) != spec.n)
      throw DimensionError(where + " has " + std::to_string(r.iota.size()) +
                           " action exponents but omega has length " + std::to_string(spec.n));
    if (r.j.size() % 2 != 0)
      throw SpecError(r.line, r.col, "normal exponents come in (u, v) halves; got " + std::to_string(r.j.size()));
    const int rd = static_cast<int>(r.j.size()) / 2;
    if (declared_d && rd != *declared_d)
      throw DimensionError(where + " implies d = " + std::to_string(rd) + " but [system] declares d = " +
                           std::to_string(*declared_d));
    if (d_from_rows && rd != *d_from_rows)
      throw DimensionError(where + " implies d = " + std::to_string(rd) + " but an earlier row implies d = " +
                           std::to_string(*d_from_rows));
    d_from_rows = rd;
  }
  spec.d = declared_d.value_or(d_from_rows.value_or(1));
  if (spec.d < 0) throw DimensionError("[system] d must be nonnegative, got " + std::to_string(spec.d));
  if (2 * spec.n + 2 * spec.d > kMaxSlots)
    throw DimensionError("2n + 2d = " + std::to_string(2 * spec.n + 2 * spec.d) + " exceeds the supported " +
                         std::to_string(kMaxSlots));
  spec.h_tilde = build_series(rows, "h_tilde", spec.n, spec.d);
  spec.g = build_series(rows, "g", spec.n, spec.d);
  spec.perturbation = build_series(rows, "perturbation", spec.n, spec.d);
  spec.schedule.n = spec.n;
  spec.schedule.d = spec.d;

  if (lo.has_value() != hi.has_value()) throw SpecError(lo_line ? lo_line : end_line, 1, "[region] needs both lo and hi");
  if (lo) {
    if (lo->size() != hi->size())
      throw DimensionError("[region] lo has length " + std::to_string(lo->size()) + " but hi has length " +
                           std::to_string(hi->size()));
    spec.box = {*lo, *hi};
  }

  if (seen.count("omega_map")) {
    if (map_identity) {
      if (!map_rows.empty()) throw SpecError(map_rows.front().first->no, 1, "identity map takes no rows");
      spec.omega_map = OmegaMap::identity(spec.n);
    } else {
      if (!map_params) throw SpecError(end_line, 1, "[omega_map] needs params = p or identity = true");
      std::vector<std::vector<OmegaMap::Monomial>> comps(spec.n);
      for (const auto& [ln, groups] : map_rows) {
        if (groups.size() != 3 || groups[0].size() != 1 || groups[1].size() != 1)
          throw SpecError(ln->no, ln->toks.front().col, "map row needs 'component | coeff | powers'");
        const int comp = to_int(*ln, groups[0][0]);
        if (comp < 0 || comp >= spec.n)
          throw DimensionError("line " + std::to_string(ln->no) + ": [omega_map] component " + std::to_string(comp) +
                               " but omega has length " + std::to_string(spec.n));
        OmegaMap::Monomial mono{to_double(*ln, groups[1][0]), {}};
        for (const Token& t : groups[2]) mono.powers.push_back(to_int(*ln, t));
        if (static_cast<int>(mono.powers.size()) != *map_params)
          throw DimensionError("line " + std::to_string(ln->no) + ": [omega_map] row has " +
                               std::to_string(mono.powers.size()) + " powers but params = " +
                               std::to_string(*map_params));
        comps[comp].push_back(std::move(mono));
      }
      spec.omega_map = OmegaMap(*map_params, std::move(comps));
    }
    if (spec.box.dim() > 0 && spec.box.dim() != spec.omega_map->params())
      throw DimensionError("[region] box has dimension " + std::to_string(spec.box.dim()) +
                           " but [omega_map] has " + std::to_string(spec.omega_map->params()) + " parameters");
  }
  return spec;
}

RunSpec parse_spec_string(const std::string& text) {
  std::istringstream is(text);
  return parse_spec(is);
}

RunSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file '" + path + "'");
  return parse_spec(in);
}

void write_spec(std::ostream& os, const RunSpec& spec) {
  const ScheduleConfig& sc = spec.schedule;
  os << "[system]\n";
  os << "n = " << spec.n << "\nd = " << spec.d << "\nomega = ";
  write_vec(os, spec.omega);
  os << "\n\n[h_tilde]\n";
  write_table(os, spec.h_tilde);
  os << "\n[g]\n";
  write_table(os, spec.g);
  os << "\n[perturbation]\n";
  write_table(os, spec.perturbation);
  os << "\n[schedule]\n";
  os << "epsilon = " << format_double(sc.epsilon) << "\nm = " << sc.m << "\nL = " << format_double(sc.L)
     << "\ntau = " << format_double(sc.tau) << "\ns = " << format_double(sc.s) << "\nr = " << format_double(sc.r)
     << "\nsigma = " << format_double(sc.sigma) << "\nmode = " << to_string(sc.mode) << "\nk_base = " << sc.k_base
     << "\nc =";
  for (double c : sc.c) os << ' ' << format_double(c);
  os << "\nmax_steps = " << spec.max_steps << "\nstop_norm = " << format_double(spec.stop_norm) << "\n\n[region]\n";
  if (spec.box.dim() > 0) {
    os << "lo = ";
    write_vec(os, spec.box.lo);
    os << "\nhi = ";
    write_vec(os, spec.box.hi);
    os << '\n';
  }
  os << "samples = " << spec.samples << "\nseed = " << spec.seed << '\n';
  if (!spec.epsilons.empty()) {
    os << "epsilons =";
    for (double e : spec.epsilons) os << ' ' << format_double(e);
    os << '\n';
  }
  os << "steps = " << spec.measure_steps << "\nM = " << spec.jet_order << "\na1_grid = " << spec.a1_grid
     << "\na1_directions = " << spec.a1_directions << "\na0_radius = " << format_double(spec.a0_radius)
     << "\na0_samples = " << spec.a0_samples << '\n';
  if (spec.omega_map) {
    os << "\n[omega_map]\nparams = " << spec.omega_map->params() << '\n';
    const auto& comps = spec.omega_map->components();
    for (std::size_t c = 0; c < comps.size(); ++c) {
      for (const auto& mono : comps[c]) {
        os << c << " | " << format_double(mono.coeff) << " |";
        for (int p : mono.powers) os << ' ' << p;
        os << '\n';
      }
    }
  }
  os << "\n[torus]\nT = " << format_double(spec.torus_T) << "\nh = " << format_double(spec.torus_h)
     << "\nangles = " << spec.torus_angles << "\nchain = " << (spec.chain_torus ? "true" : "false") << '\n';
  os << "\n[counterexample]\nepsilon = " << format_double(spec.cx_epsilon)
     << "\nomega = " << format_double(spec.cx_omega) << "\nT = " << format_double(spec.cx_T)
     << "\nh = " << format_double(spec.cx_h) << '\n';
  os << "\n[output]\ndir = " << spec.out_dir << "\ndump_series = " << (spec.dump_series ? "true" : "false") << '\n';
}

std::string spec_to_string(const RunSpec& spec) {
  std::ostringstream os;
  write_spec(os, spec);
  return os.str();
}

bool spec_equal(const RunSpec& a, const RunSpec& b) {
  const ScheduleConfig &x = a.schedule, &y = b.schedule;
  const bool schedule_same = x.epsilon == y.epsilon && x.m == y.m && x.L == y.L && x.n == y.n && x.d == y.d &&
                             x.tau == y.tau && x.s == y.s && x.r == y.r && x.sigma == y.sigma && x.mode == y.mode &&
                             x.k_base == y.k_base && x.c == y.c;
  bool maps_same = a.omega_map.has_value() == b.omega_map.has_value();
  if (maps_same && a.omega_map) {
    const auto &ca = a.omega_map->components(), &cb = b.omega_map->components();
    maps_same = a.omega_map->params() == b.omega_map->params() && ca.size() == cb.size();
    for (std::size_t c = 0; maps_same && c < ca.size(); ++c) {
      maps_same = ca[c].size() == cb[c].size();
      for (std::size_t t = 0; maps_same && t < ca[c].size(); ++t)
        maps_same = ca[c][t].coeff == cb[c][t].coeff && ca[c][t].powers == cb[c][t].powers;
    }
  }
  return vec_equal(a.omega, b.omega) && a.n == b.n && a.d == b.d && a.h_tilde == b.h_tilde && a.g == b.g &&
         a.perturbation == b.perturbation && schedule_same && a.max_steps == b.max_steps &&
         a.stop_norm == b.stop_norm && vec_equal(a.box.lo, b.box.lo) && vec_equal(a.box.hi, b.box.hi) &&
         a.samples == b.samples && a.seed == b.seed && a.epsilons == b.epsilons &&
         a.measure_steps == b.measure_steps && a.jet_order == b.jet_order && a.a1_grid == b.a1_grid &&
         a.a1_directions == b.a1_directions && a.a0_radius == b.a0_radius && a.a0_samples == b.a0_samples &&
         maps_same && a.torus_T == b.torus_T && a.torus_h == b.torus_h && a.torus_angles == b.torus_angles &&
         a.chain_torus == b.chain_torus && a.cx_epsilon == b.cx_epsilon && a.cx_omega == b.cx_omega &&
         a.cx_T == b.cx_T && a.cx_h == b.cx_h && a.out_dir == b.out_dir && a.dump_series == b.dump_series;
}

std::string spec_hash(const RunSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : spec_to_string(spec)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kamdeg
