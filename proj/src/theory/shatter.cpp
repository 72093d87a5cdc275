#include "setcover/theory/shatter.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "setcover/csv_io.hpp"
#include "setcover/error.hpp"

namespace setcover::theory {

namespace {

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::string to_string(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

bool member(std::uint32_t subset, int i) { return ((subset >> i) & 1u) != 0; }

}  // namespace

Rational PiecewiseDensity::exact_mass(const Rational& a, const Rational& b) const {
  Rational total(0);
  for (const auto& p : pieces) {
    const Rational lo = std::max(p.lo, a);
    const Rational hi = std::min(p.hi, b);
    if (hi > lo) total += (hi - lo) * p.coef;
  }
  return total;
}

double PiecewiseDensity::mass(double a, double b) const {
  double total = 0.0;
  for (const auto& p : pieces) {
    const double lo = std::max(to_double(p.lo), a);
    const double hi = std::min(to_double(p.hi), b);
    if (hi > lo) total += (hi - lo) * to_double(p.coef) * unit;
  }
  const double lo = std::max(filler_lo, a);
  const double hi = std::min(filler_hi, b);
  if (hi > lo) total += (hi - lo) * filler_density;
  return total;
}

double PiecewiseDensity::total_mass() const {
  Rational exact(0);
  for (const auto& p : pieces) exact += (p.hi - p.lo) * p.coef;
  return to_double(exact) * unit + (filler_hi - filler_lo) * filler_density;
}

Rational nonmember_coefficient(int n, const Rational& small_share) {
  const std::int64_t half = std::int64_t{1} << (n - 1);
  return (Rational(1) - small_share) + small_share * Rational(half, half + 1);
}

RectangleShatter build_rectangle_shatter(int n, double gamma) {
  if (n < 1 || n > kMaxShatterDomains) {
    throw ConfigError("shatter needs 1 <= n <= " + std::to_string(kMaxShatterDomains));
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");

  const std::int64_t cells = std::int64_t{1} << n;
  const std::int64_t half = cells / 2;
  const Rational r(half, half + 1);
  const double unit = 1.0 - gamma;

  // Positive-side mass is (1 + s (2r - 1)) (1 - gamma); it must not exceed 1.
  Rational share(1, 100);
  const double excess = to_double(Rational(2) * r - Rational(1));
  if (excess > 0.0) {
    const double bound = gamma / (unit * excess);
    if (bound < to_double(share)) {
      const auto micro = static_cast<std::int64_t>(std::floor(bound / 2.0 * 1e6));
      if (micro <= 0) throw ConfigError("gamma too small for the shatter construction");
      share = Rational(micro, 1000000);
    }
  }

  RectangleShatter out;
  out.n = n;
  out.gamma = gamma;
  out.small_share = share;
  out.middle_piece = static_cast<std::size_t>(half);
  const Rational small = share * Rational(cells, half + 1);
  for (int i = 0; i < n; ++i) {
    PiecewiseDensity d;
    d.unit = unit;
    for (std::int64_t j = 0; j < cells; ++j) {
      if (member(static_cast<std::uint32_t>(j), i)) {
        d.pieces.push_back({Rational(j, cells), Rational(j + 1, cells), small});
      }
    }
    d.pieces.push_back({Rational(1), Rational(2), Rational(1) - share});
    for (std::int64_t j = 1; j < cells; ++j) {
      if (member(static_cast<std::uint32_t>(j), i)) {
        d.pieces.push_back({Rational(2) + Rational(j - 1, cells), Rational(2) + Rational(j, cells),
                            small});
      }
    }
    double rest = 1.0 - d.total_mass();
    if (rest < 0.0 && rest > -1e-12) rest = 0.0;
    if (rest < 0.0) throw ConfigError("shatter construction exceeds unit mass");
    d.filler_density = rest / (d.filler_hi - d.filler_lo);
    out.domains.push_back(std::move(d));
  }
  for (std::int64_t j = 0; j < cells; ++j) {
    out.windows.push_back({Rational(j, cells), Rational(2) + Rational(j, cells)});
  }
  return out;
}

std::vector<AssignmentVerdict> verify_shatter(const RectangleShatter& shatter) {
  std::vector<AssignmentVerdict> out;
  for (std::size_t j = 0; j < shatter.windows.size(); ++j) {
    const auto& w = shatter.windows[j];
    AssignmentVerdict v;
    v.j = static_cast<int>(j);
    v.subset = static_cast<std::uint32_t>(j);
    v.verified = true;
    for (int i = 0; i < shatter.n; ++i) {
      const auto& d = shatter.domains[static_cast<std::size_t>(i)];
      const Rational c = d.exact_mass(w.lo, w.hi);
      v.coefficients.push_back(c);
      v.masses.push_back(d.mass(to_double(w.lo), to_double(w.hi)));
      if ((c >= Rational(1)) != member(v.subset, i)) v.verified = false;
    }
    out.push_back(std::move(v));
  }
  return out;
}

void perturb_piece(RectangleShatter& shatter, int domain, std::size_t piece,
                   const Rational& factor) {
  auto& pieces = shatter.domains.at(static_cast<std::size_t>(domain)).pieces;
  pieces.at(piece).coef *= factor;
}

void write_shatter_csv(std::ostream& out, const RectangleShatter& shatter,
                       const std::vector<AssignmentVerdict>& verdicts) {
  out << "j,subset,domain,member,mass,coefficient,verified\n";
  for (const auto& v : verdicts) {
    for (int i = 0; i < shatter.n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      out << v.j << ',' << v.subset << ',' << i << ',' << (member(v.subset, i) ? 1 : 0) << ','
          << format_double(v.masses[k]) << ',' << to_string(v.coefficients[k]) << ','
          << (v.verified ? 1 : 0) << '\n';
    }
  }
}

}  // namespace setcover::theory
