#pragma once

// Exact integer core for the nearest-square distance sequence
//
//   P_n = n(n+1)(2n+1)/6,   a_n = |P_n - y_n^2|,
//
// where y_n^2 is the square closest to P_n. Every comparison here is decided
// in integers; the only approximate quantity is FixedFrac, which carries its
// own error bound.

#include <cstdint>
#include <functional>
#include <vector>

#include "cannonball/bigint.hpp"
#include "cannonball/parallel.hpp"

namespace cannonball {

/// Which side of 1/2 the fractional part {sqrt(P_n)} falls on. It is never
/// exactly 1/2: 4 P_n is even while (2f+1)^2 is odd. Perfect squares
/// ({sqrt(P_n)} = 0) are BelowHalf.
enum class HalfSide { BelowHalf, AboveHalf };

const char* to_string(HalfSide side);

struct Term {
  std::uint64_t n = 0;
  BigInt p;  // P_n
  BigInt f;  // floor(sqrt(P_n))
  BigInt y;  // root of the closest square, f or f+1
  BigInt a;  // |P_n - y^2|
  HalfSide side = HalfSide::BelowHalf;
};

/// Term in 128-bit arithmetic. Valid for n <= kFastPathLimit.
struct CompactTerm {
  std::uint64_t n = 0;
  u128 p = 0;
  u128 f = 0;
  std::uint64_t a = 0;
  HalfSide side = HalfSide::BelowHalf;

  u128 y() const { return side == HalfSide::BelowHalf ? f : f + 1; }
};

/// Largest n served by the 128-bit path: P_n < 2^119, so 4 P_n and
/// (2f+1)^2 both fit comfortably.
inline constexpr std::uint64_t kFastPathLimit = std::uint64_t{1} << 40;

/// Fractional part of sqrt(P_n) as mantissa * 2^-bits. The true value lies in
/// [mantissa, mantissa + err_ulps) * 2^-bits.
struct FixedFrac {
  BigInt mantissa;
  unsigned bits = 0;
  unsigned err_ulps = 1;

  long double value() const;
};

struct RangeSpec {
  std::uint64_t lo = 1;
  std::uint64_t hi = 1;
  std::uint64_t chunk = kDefaultChunk;

  /// Throws ConfigError unless 1 <= lo <= hi and chunk >= 1.
  void validate() const;
  ChunkPlan plan() const { return {lo, hi, chunk}; }
};

inline constexpr unsigned kDefaultFracBits = 96;

BigInt pyramidal(std::uint64_t n);
u128 pyramidal_u128(std::uint64_t n);

/// y minimizing |p - y^2|; the smaller y on a tie. Throws std::domain_error
/// for p < 0.
BigInt nearest_square_root(const BigInt& p);

/// Fully resolved term. Indices above `fast_path_limit` (clamped to
/// kFastPathLimit) use arbitrary precision throughout.
Term term(std::uint64_t n, std::uint64_t fast_path_limit = kFastPathLimit);
CompactTerm compact_term(std::uint64_t n);

/// {sqrt(P_n)} to `bits` binary places: isqrt(P_n * 4^bits) - f * 2^bits.
/// Throws ConfigError for bits < 32.
FixedFrac frac_sqrt(std::uint64_t n, unsigned bits = kDefaultFracBits);

/// Mantissa of frac_sqrt as a 128-bit word, for bits <= 128.
u128 frac_sqrt_u128(std::uint64_t n, unsigned bits);

/// True iff the nearest-square root y_n differs from the integer nearest to
/// sqrt(P_n).
bool in_exceptional(std::uint64_t n);

/// Every n in [1, x] with in_exceptional(n), in increasing order.
std::vector<std::uint64_t> exceptional_members(std::uint64_t x,
                                               unsigned workers = 1);

/// Position of {sqrt(P_n)} relative to the half-window checks used for
/// members of the exceptional set: both report whether the fractional part
/// sits within 1/sqrt(P_n) of 1/2 on the stated side.
bool in_upper_half_window(std::uint64_t n);
bool in_lower_half_window(std::uint64_t n);

struct NearHalfCount {
  std::uint64_t x = 0;
  unsigned bits = 0;
  std::uint64_t count = 0;
  std::uint64_t borderline = 0;
};

/// Counts n <= x with |{sqrt(P_n)} - 1/2| <= x^(-3/4). Indices whose fixed
/// point margin against the window edge is under two ulps are reported as
/// borderline instead of counted. Perfect squares never count.
NearHalfCount near_half_count(std::uint64_t x,
                              unsigned bits = kDefaultFracBits,
                              unsigned workers = 1);

/// Calls sink(term) for n = lo..hi in order.
void stream_terms(const RangeSpec& range,
                  const std::function<void(const Term&)>& sink);

/// All terms of the range, computed chunk-parallel and returned in order.
std::vector<Term> collect_terms(const RangeSpec& range, unsigned workers = 1);

/// sqrt(P_n) and the two-term expansion n^(3/2)/sqrt(3) + sqrt(3) n^(1/2)/4
/// evaluated in Real precision.
Real sqrt_pyramidal(std::uint64_t n);
Real two_term_expansion(std::uint64_t n);

}  // namespace cannonball
