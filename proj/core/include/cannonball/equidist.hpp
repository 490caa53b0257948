#pragma once

// Equidistribution diagnostics for {sqrt(P_n)} and |sqrt(P_n) - y_n|:
// Weyl sums, the second-derivative exponential sum bound, exact star
// discrepancy, the Erdos-Turan bound and distance histograms.
//
// Points are held in fixed point (mantissa * 2^-bits). For such points the
// phase {m u} is exact, so the only numerical error in an exponential sum is
// the trigonometric evaluation, and a discrepancy computed from the
// mantissas is the exact discrepancy of the stored point set.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cannonball/bigint.hpp"
#include "cannonball/exactseq.hpp"

namespace cannonball {

struct FixedPoints {
  unsigned bits = kDefaultFracBits;
  /// Each in [0, 2^bits).
  std::vector<u128> mantissas;
  /// Points whose stored value is within two ulps of a decision boundary
  /// of the transform that produced them (0 for plain fractional parts).
  std::uint64_t flagged = 0;

  std::size_t size() const { return mantissas.size(); }
};

/// {sqrt(P_n)} for n = lo..hi, each within one ulp (rounded down).
FixedPoints frac_points(std::uint64_t lo, std::uint64_t hi,
                        unsigned bits = kDefaultFracBits, unsigned workers = 1);

/// 2 |sqrt(P_n) - y_n| for n = 1..x, each within two ulps.
FixedPoints doubled_distance_points(std::uint64_t x,
                                    unsigned bits = kDefaultFracBits,
                                    unsigned workers = 1);

// --- exponential sums -------------------------------------------------------

struct ExpSum {
  std::int64_t m = 0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  long double re = 0;
  long double im = 0;
  /// Absolute bound on |computed - true| for the complex sum.
  long double error = 0;
  std::optional<long double> kn_bound;

  long double modulus() const;
};

/// Throws ConfigError when |m| 2^-bits >= 1e-12, naming the bits needed.
void check_phase_precision(std::int64_t m, unsigned bits);

/// sum_{n=lo}^{hi} e(m sqrt(P_n)).
ExpSum exp_sum(std::uint64_t lo, std::uint64_t hi, std::int64_t m,
               unsigned bits = kDefaultFracBits, unsigned workers = 1);

/// sum over the stored points of e(m u). `lo` labels the first point.
/// `point_error_ulps` is how far each stored point may sit from the value it
/// stands for; it enters the error bound.
ExpSum exp_sum(const FixedPoints& points, std::int64_t m,
               std::uint64_t lo = 1, unsigned point_error_ulps = 0);

/// h(t) = sqrt(t (t+1) (2t+1) / 6) and its first two derivatives.
struct DerivBounds {
  long double n = 0;
  long double h1 = 0;
  long double h2 = 0;
};

long double pyramidal_root(long double t);
DerivBounds deriv_bounds(long double n);

/// (|m h'(hi) - m h'(lo)| + 2) (4 / sqrt(rho) + 3) with rho = m h''(hi).
/// Requires lo < hi and m >= 1.
long double kn_bound(std::uint64_t lo, std::uint64_t hi, std::int64_t m);

// --- discrepancy ------------------------------------------------------------

struct DiscrepancyResult {
  std::uint64_t N = 0;
  long double d_unnormalized = 0;  // sup_alpha |Z(N; alpha) - N alpha|
  long double d_star = 0;          // d_unnormalized / N
  std::optional<unsigned> K;
  std::optional<long double> et_bound;
  /// Numerical allowance on et_bound from the exponential sums.
  long double slack = 0;

  /// d_unnormalized <= et_bound + slack; true when no bound was computed.
  bool bound_holds() const;
};

/// Star discrepancy of points in [0, 1) via the sorted-points formula
/// max_i max(i/N - u_(i), u_(i) - (i-1)/N). Throws std::domain_error for a
/// point outside [0, 1) and ConfigError for an empty set.
DiscrepancyResult star_discrepancy(std::span<const double> points);

/// Same, exact in the fixed-point mantissas.
DiscrepancyResult star_discrepancy(const FixedPoints& points);

/// Exact discrepancy plus N/(K+1) + 3 sum_{m<=K} |S_m| / m.
DiscrepancyResult erdos_turan(const FixedPoints& points, unsigned K);

struct ErdosTuranSweep {
  std::vector<DiscrepancyResult> rows;
  std::size_t best = 0;  // index of the smallest et_bound
};

ErdosTuranSweep erdos_turan_sweep(const FixedPoints& points,
                                  std::span<const unsigned> Ks);

// --- histograms and Weyl profiles -------------------------------------------

struct Histogram {
  std::uint64_t x = 0;
  unsigned bins = 0;
  unsigned bits = 0;
  std::vector<std::uint64_t> counts;
  /// Distances within two ulps of a bin edge; counted in the lower bin.
  std::uint64_t flagged = 0;

  std::uint64_t total() const;
  /// max_b |counts[b] / total - 1 / bins|.
  long double max_deviation() const;
};

/// Histogram of |sqrt(P_n) - y_n| over [0, 1/2] in equal bins
/// ((b-1)/(2 bins), b/(2 bins)]; distance 0 lands in bin 1.
Histogram half_distance_histogram(std::uint64_t x, unsigned bins,
                                  unsigned bits = kDefaultFracBits,
                                  unsigned workers = 1);

struct WeylRow {
  std::int64_t m = 0;
  long double normalized = 0;  // |S_m(N)| / N
  long double error = 0;       // bound on the error of `normalized`
};

/// |sum_{n<=N} e(m sqrt(P_n))| / N for m = 1..m_max.
std::vector<WeylRow> weyl_profile(std::uint64_t N, unsigned m_max,
                                  unsigned bits = kDefaultFracBits,
                                  unsigned workers = 1);

}  // namespace cannonball
