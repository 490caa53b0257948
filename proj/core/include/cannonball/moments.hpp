#pragma once

// Power moments M_k(x) = sum_{n <= x} a_n^k, the average A(x) = M_1(x)/x,
// their asymptotic main terms, and a rigorously rounded two-sided bracket
// of M_k(x) built from the factorization
//
//   a_n = |sqrt(P_n) - y_n| * (sqrt(P_n) + y_n).

#include <cstdint>
#include <span>
#include <vector>

#include "cannonball/bigint.hpp"
#include "cannonball/exactseq.hpp"
#include "cannonball/parallel.hpp"

namespace cannonball {

inline constexpr unsigned kMaxMomentOrder = 12;

struct ReductionOptions {
  unsigned workers = 1;
  std::uint64_t chunk = kDefaultChunk;
  std::uint64_t fast_path_limit = kFastPathLimit;
};

struct MomentSummary {
  std::uint64_t x = 0;
  unsigned k = 0;
  BigInt exact;
  Real main;
  Real residual;    // exact - main
  Real normalized;  // residual / x^(3k/2 + 11/12)
};

struct Average {
  std::uint64_t x = 0;
  BigRational exact;  // M_1(x) / x
  Real value;
  Real main;  // x^(3/2) / (5 sqrt 3)
};

/// Throws ConfigError unless 1 <= k <= kMaxMomentOrder.
void check_moment_order(unsigned k);

/// sum_{n=lo}^{hi} a_n^k, exact. Disjoint ranges add.
BigInt moment_sum(std::uint64_t lo, std::uint64_t hi, unsigned k,
                  const ReductionOptions& opts = {});

MomentSummary moment(std::uint64_t x, unsigned k,
                     const ReductionOptions& opts = {});

/// Fills in main/residual/normalized for an already known exact sum.
MomentSummary summarize_moment(std::uint64_t x, unsigned k, BigInt exact);

Average average(std::uint64_t x, const ReductionOptions& opts = {});
Average summarize_average(std::uint64_t x, const BigInt& first_moment);

/// 1 / (3^(k/2) (3k/2 + 1) (k + 1)).
Real main_coefficient(unsigned k);

/// main_coefficient(k) * x^(3k/2 + 1).
Real main_term(std::uint64_t x, unsigned k);

// ---------------------------------------------------------------------------
// Sandwich bracket.
//
// With d_n = |sqrt(P_n) - y_n| and bin j holding (j-1)/L < d_n <= j/L
// (d_n = 0 goes to bin 1), let W_j = sum over bin j of (sqrt(P_n) + y_n)^k.
// Then
//   lower = sum_j ((j-1)/L)^k W_j  <=  M_k(x)  <=  sum_j (j/L)^k W_j = upper.
// Bin membership is decided in integers. sqrt(P_n) is enclosed in
// [s, s+1] / 2^bits with s = isqrt(P_n 4^bits), so W_j is carried as a
// rounded-down and a rounded-up integer numerator over 2^(k bits); the
// final comparison against M_k(x) is an exact integer comparison.

struct SandwichPartial {
  unsigned k = 0;
  unsigned L = 0;
  unsigned bits = 0;
  std::vector<BigInt> weight_lo;  // index j-1, scaled by 2^(k bits)
  std::vector<BigInt> weight_hi;
  std::vector<std::uint64_t> counts;
  BigInt exact;                   // partial M_k over the same indices

  void merge(const SandwichPartial& other);
};

struct SandwichResult {
  std::uint64_t x = 0;
  unsigned k = 0;
  unsigned L = 0;
  unsigned bits = 0;
  BigInt exact;
  // lower = lower_num / denominator, upper = upper_num / denominator.
  BigInt lower_num;
  BigInt upper_num;
  BigInt denominator;
  Real lower;
  Real upper;
  std::vector<std::uint64_t> bin_counts;

  /// lower_num <= exact * denominator <= upper_num, decided exactly.
  bool certified() const;
  /// (upper - lower) / upper; zero when upper is zero.
  Real relative_width() const;
};

inline constexpr unsigned kDefaultSandwichBits = 64;

/// Throws ConfigError for odd or zero L.
void check_bin_count(unsigned L);

SandwichPartial sandwich_partial(std::uint64_t lo, std::uint64_t hi,
                                 unsigned k, unsigned L,
                                 unsigned bits = kDefaultSandwichBits,
                                 const ReductionOptions& opts = {});
SandwichResult finish_sandwich(std::uint64_t x, const SandwichPartial& part);

SandwichResult sandwich(std::uint64_t x, unsigned k, unsigned L,
                        const ReductionOptions& opts = {},
                        unsigned bits = kDefaultSandwichBits);

/// Bin index j in [1, L/2] of d_n = |sqrt(P_n) - y_n| for the half-open
/// bins ((j-1)/L, j/L]; d_n = 0 maps to 1.
unsigned distance_bin(const Term& t, unsigned L);

// ---------------------------------------------------------------------------
// Log-log fits.

struct FitReport {
  std::vector<std::uint64_t> xs;
  std::vector<Real> values;
  double slope = 0;
  double intercept = 0;
};

/// Least squares of log|value| on log x over the points with nonzero value.
/// Throws InsufficientDataError when fewer than three remain.
FitReport fit_loglog(std::span<const std::uint64_t> xs,
                     std::span<const Real> values);

/// Fit of |M_k(x) - main_term(x, k)| over strictly increasing xs, computed
/// in a single pass over [1, max xs].
FitReport fit_residual(std::span<const std::uint64_t> xs, unsigned k,
                       const ReductionOptions& opts = {});

/// M_k at each of the strictly increasing xs, in one pass.
std::vector<BigInt> moments_at(std::span<const std::uint64_t> xs, unsigned k,
                               const ReductionOptions& opts = {});

}  // namespace cannonball
