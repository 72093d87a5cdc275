#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace setcover::theory {

using Rational = boost::rational<std::int64_t>;

/// Constant density `coef * unit` on [lo, hi].
struct DensityPiece {
  Rational lo;
  Rational hi;
  Rational coef;
};

/// Piecewise-constant density on the line. Exact pieces are rational
/// multiples of `unit` (= 1 - gamma); a filler piece of plain density
/// completes the total mass to 1.
struct PiecewiseDensity {
  double unit = 1.0;
  std::vector<DensityPiece> pieces;
  double filler_lo = -2.0;
  double filler_hi = -1.0;
  double filler_density = 0.0;

  /// Mass of [a, b] from the exact pieces, in multiples of `unit`.
  Rational exact_mass(const Rational& a, const Rational& b) const;
  /// Mass of [a, b] including the filler piece.
  double mass(double a, double b) const;
  double total_mass() const;
};

struct Window {
  Rational lo;
  Rational hi;
};

/// n domains and 2^n sliding windows; window j covers exactly the domains
/// in subset I_j (bit i of j set means domain i is in I_j).
struct RectangleShatter {
  int n = 0;
  double gamma = 0.0;
  /// Share of the unit carried by the small pieces (0.01 unless rescaled).
  Rational small_share;
  std::size_t middle_piece = 0;  // index of the [1, 2] piece in every domain
  std::vector<PiecewiseDensity> domains;
  std::vector<Window> windows;
};

inline constexpr int kMaxShatterDomains = 10;

/// Throws ConfigError unless 1 <= n <= kMaxShatterDomains and 0 < gamma < 1.
RectangleShatter build_rectangle_shatter(int n, double gamma);

/// Expected window mass coefficient (in units of 1 - gamma) of a non-member:
/// 0.99 + 0.01 * 2^{n-1} / (2^{n-1} + 1) for the unscaled construction.
Rational nonmember_coefficient(int n, const Rational& small_share);

struct AssignmentVerdict {
  int j = 0;
  std::uint32_t subset = 0;
  std::vector<Rational> coefficients;  // window mass / (1 - gamma), per domain
  std::vector<double> masses;
  bool verified = false;  // coefficient >= 1 exactly for members only
};

std::vector<AssignmentVerdict> verify_shatter(const RectangleShatter& shatter);

/// Multiplies the density of piece `piece` of domain `domain` by `factor`.
void perturb_piece(RectangleShatter& shatter, int domain, std::size_t piece,
                   const Rational& factor);

/// CSV columns: j,subset,domain,member,mass,coefficient,verified.
void write_shatter_csv(std::ostream& out, const RectangleShatter& shatter,
                       const std::vector<AssignmentVerdict>& verdicts);

}  // namespace setcover::theory
