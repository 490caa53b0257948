#include "cannonball/equidist.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <string>

#include "cannonball/errors.hpp"
#include "cannonball/parallel.hpp"

namespace cannonball {

namespace {

constexpr long double kTwoPi = 2 * std::numbers::pi_v<long double>;
constexpr long double kEps = LDBL_EPSILON;

u128 low_mask(unsigned bits) {
  return bits >= 128 ? ~u128{0} : (u128{1} << bits) - 1;
}

void check_point_bits(unsigned bits) {
  if (bits < 32 || bits > 128) {
    throw ConfigError("fixed-point points need 32..128 bits, got " +
                      std::to_string(bits));
  }
}

// Top 64 bits of a `bits`-wide fraction, as a value in [0, 1).
long double to_unit(u128 mantissa, unsigned bits) {
  const std::uint64_t top =
      bits >= 64 ? static_cast<std::uint64_t>(mantissa >> (bits - 64))
                 : static_cast<std::uint64_t>(mantissa << (64 - bits));
  return std::ldexp(static_cast<long double>(top), -64);
}

FixedPoints merge_points(unsigned bits, std::vector<FixedPoints>&& parts) {
  FixedPoints all;
  all.bits = bits;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  all.mantissas.reserve(total);
  for (auto& p : parts) {
    all.mantissas.insert(all.mantissas.end(), p.mantissas.begin(),
                         p.mantissas.end());
    all.flagged += p.flagged;
  }
  return all;
}

}  // namespace

FixedPoints frac_points(std::uint64_t lo, std::uint64_t hi, unsigned bits,
                        unsigned workers) {
  check_point_bits(bits);
  if (lo < 1 || hi < lo) throw ConfigError("point range must satisfy 1 <= lo <= hi");
  auto parts = map_chunks(ChunkPlan{lo, hi, kDefaultChunk}, workers,
                          [bits](std::uint64_t a, std::uint64_t b) {
                            FixedPoints part;
                            part.bits = bits;
                            part.mantissas.reserve(b - a + 1);
                            for (std::uint64_t n = a; n <= b; ++n) {
                              part.mantissas.push_back(frac_sqrt_u128(n, bits));
                            }
                            return part;
                          });
  return merge_points(bits, std::move(parts));
}

FixedPoints doubled_distance_points(std::uint64_t x, unsigned bits,
                                    unsigned workers) {
  check_point_bits(bits);
  if (bits > 127) throw ConfigError("doubled distances need bits <= 127");
  if (x < 1) throw ConfigError("doubled distances need x >= 1");
  const u128 one = u128{1} << bits;
  const u128 half = one >> 1;
  auto parts = map_chunks(
      ChunkPlan{1, x, kDefaultChunk}, workers,
      [&](std::uint64_t a, std::uint64_t b) {
        FixedPoints part;
        part.bits = bits;
        part.mantissas.reserve(b - a + 1);
        for (std::uint64_t n = a; n <= b; ++n) {
          const u128 m = frac_sqrt_u128(n, bits);
          // The side is exact: m < 2^(bits-1) iff {sqrt P} < 1/2.
          const u128 d = m < half ? m : one - m;
          u128 doubled = 2 * d;
          if (doubled >= one) {
            doubled = one - 1;
            ++part.flagged;
          }
          part.mantissas.push_back(doubled);
        }
        return part;
      });
  return merge_points(bits, std::move(parts));
}

// --- exponential sums -------------------------------------------------------

long double ExpSum::modulus() const { return std::hypot(re, im); }

void check_phase_precision(std::int64_t m, unsigned bits) {
  const long double scaled =
      std::ldexp(std::fabs(static_cast<long double>(m)), -static_cast<int>(bits));
  if (!(scaled < 1e-12L)) {
    const unsigned needed = static_cast<unsigned>(
        std::ceil(std::log2(std::fabs(static_cast<long double>(m)) * 1e12L))) + 1;
    throw ConfigError("harmonic " + std::to_string(m) + " needs at least " +
                      std::to_string(needed) + " bits of phase precision, got " +
                      std::to_string(bits));
  }
}

ExpSum exp_sum(const FixedPoints& points, std::int64_t m, std::uint64_t lo,
               unsigned point_error_ulps) {
  check_point_bits(points.bits);
  const unsigned bits = points.bits;
  const u128 mask = low_mask(bits);
  const u128 abs_m = static_cast<u128>(m < 0 ? -static_cast<__int128>(m) : m);
  // m mod 2^bits; products wrap mod 2^128, which 2^bits divides.
  const u128 factor = (m < 0 ? (~abs_m + 1) : abs_m) & mask;

  ExpSum out;
  out.m = m;
  out.lo = lo;
  out.hi = lo + points.size() - (points.size() ? 1 : 0);

  // Fixed chunks keep the summation order independent of any threading.
  const std::size_t n = points.size();
  const std::size_t chunk = kDefaultChunk;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t stop = std::min(n, start + chunk);
    long double re = 0;
    long double im = 0;
    for (std::size_t i = start; i < stop; ++i) {
      const u128 phase = (factor * points.mantissas[i]) & mask;
      const long double theta = kTwoPi * to_unit(phase, bits);
      re += std::cos(theta);
      im += std::sin(theta);
    }
    out.re += re;
    out.im += im;
  }

  // Per term: point error scaled by |m|, truncation of the phase to 64
  // bits, and the trigonometric evaluation. Summation: chunked naive sums.
  const long double count = static_cast<long double>(n);
  const long double per_term =
      kTwoPi * (std::ldexp(static_cast<long double>(abs_m) * point_error_ulps,
                           -static_cast<int>(bits)) +
                std::ldexp(1.0L, -64)) +
      4 * kEps;
  const long double chunks = std::ceil(count / chunk);
  const long double summation = kEps * (static_cast<long double>(chunk) + chunks + 2);
  out.error = std::sqrt(2.0L) * count * (per_term + summation);
  return out;
}

ExpSum exp_sum(std::uint64_t lo, std::uint64_t hi, std::int64_t m,
               unsigned bits, unsigned workers) {
  if (m == 0) throw ConfigError("harmonic index m must be nonzero");
  if (lo < 1 || hi < lo) throw ConfigError("sum range must satisfy 1 <= lo <= hi");
  check_phase_precision(m, bits);
  ExpSum out = exp_sum(frac_points(lo, hi, bits, workers), m, lo, 1);
  if (lo < hi) out.kn_bound = kn_bound(lo, hi, m < 0 ? -m : m);
  return out;
}

long double pyramidal_root(long double t) {
  return std::sqrt(t * (t + 1) * (2 * t + 1) / 6);
}

DerivBounds deriv_bounds(long double n) {
  if (!(n >= 1)) throw ConfigError("derivative bounds need n >= 1");
  // Q = t(t+1)(2t+1), h = sqrt(Q/6).
  const long double q = n * (n + 1) * (2 * n + 1);
  const long double dq = 2 * n * (n + 1) + (2 * n + 1) * (n + 1) + n * (2 * n + 1);
  const long double ddq = 8 * n + 4 * (n + 1) + 2;
  const long double root6 = std::sqrt(6.0L);
  DerivBounds d;
  d.n = n;
  d.h1 = dq / (2 * root6 * std::sqrt(q));
  d.h2 = ddq / (2 * root6 * std::sqrt(q)) - dq * dq / (4 * root6 * q * std::sqrt(q));
  return d;
}

long double kn_bound(std::uint64_t lo, std::uint64_t hi, std::int64_t m) {
  if (lo < 1 || lo >= hi) throw ConfigError("kn_bound needs 1 <= lo < hi");
  if (m < 1) throw ConfigError("kn_bound needs m >= 1");
  const DerivBounds at_lo = deriv_bounds(static_cast<long double>(lo));
  const DerivBounds at_hi = deriv_bounds(static_cast<long double>(hi));
  const long double mm = static_cast<long double>(m);
  const long double rho = mm * at_hi.h2;
  return (std::fabs(mm * at_hi.h1 - mm * at_lo.h1) + 2) * (4 / std::sqrt(rho) + 3);
}

// --- discrepancy ------------------------------------------------------------

bool DiscrepancyResult::bound_holds() const {
  return !et_bound || d_unnormalized <= *et_bound + slack;
}

DiscrepancyResult star_discrepancy(std::span<const double> points) {
  if (points.empty()) throw ConfigError("discrepancy of an empty point set");
  std::vector<long double> sorted;
  sorted.reserve(points.size());
  for (double p : points) {
    if (!(p >= 0.0 && p < 1.0)) {
      throw std::domain_error("point " + std::to_string(p) + " outside [0, 1)");
    }
    sorted.push_back(p);
  }
  std::sort(sorted.begin(), sorted.end());
  const long double N = static_cast<long double>(sorted.size());
  long double worst = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const long double rank = static_cast<long double>(i + 1);
    worst = std::max({worst, rank / N - sorted[i], sorted[i] - (rank - 1) / N});
  }
  DiscrepancyResult r;
  r.N = sorted.size();
  r.d_star = worst;
  r.d_unnormalized = worst * N;
  return r;
}

namespace {

// max_i max(i 2^bits - N u_i, N u_i - (i-1) 2^bits) over sorted mantissas;
// the discrepancy is that over N 2^bits.
template <class Int>
Int sorted_defect(const std::vector<u128>& sorted, unsigned bits) {
  const Int one = Int(1) << bits;
  const Int N = Int(static_cast<std::uint64_t>(sorted.size()));
  Int worst = 0;
  Int rank_lo = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    Int u;
    if constexpr (std::is_same_v<Int, BigInt>) {
      u = to_big(sorted[i]);
    } else {
      u = static_cast<Int>(sorted[i]);
    }
    const Int scaled = N * u;
    const Int rank_hi = rank_lo + one;
    worst = std::max(worst, Int(rank_hi - scaled));
    worst = std::max(worst, Int(scaled - rank_lo));
    rank_lo = rank_hi;
  }
  return worst;
}

}  // namespace

DiscrepancyResult star_discrepancy(const FixedPoints& points) {
  check_point_bits(points.bits);
  if (points.mantissas.empty()) throw ConfigError("discrepancy of an empty point set");
  const u128 limit = points.bits >= 128 ? ~u128{0} : (u128{1} << points.bits);
  for (u128 m : points.mantissas) {
    if (points.bits < 128 && m >= limit) {
      throw std::domain_error("fixed-point mantissa outside [0, 1)");
    }
  }
  std::vector<u128> sorted = points.mantissas;
  std::sort(sorted.begin(), sorted.end());
  const std::uint64_t N = sorted.size();
  const unsigned width = static_cast<unsigned>(std::bit_width(N));

  DiscrepancyResult r;
  r.N = N;
  if (points.bits + width + 2 <= 126) {
    const __int128 worst = sorted_defect<__int128>(sorted, points.bits);
    // worst / 2^bits = unnormalized discrepancy.
    const long double hi = static_cast<long double>(
        static_cast<std::uint64_t>(worst >> 64));
    const long double lo = static_cast<long double>(
        static_cast<std::uint64_t>(worst & ~std::uint64_t{0}));
    r.d_unnormalized = std::ldexp(std::ldexp(hi, 64) + lo,
                                  -static_cast<int>(points.bits));
  } else {
    const BigInt worst = sorted_defect<BigInt>(sorted, points.bits);
    r.d_unnormalized = static_cast<long double>(
        Real(worst) / Real(BigInt(BigInt(1) << points.bits)));
  }
  r.d_star = r.d_unnormalized / static_cast<long double>(N);
  return r;
}

DiscrepancyResult erdos_turan(const FixedPoints& points, unsigned K) {
  if (K < 1) throw ConfigError("Erdos-Turan truncation K must be >= 1");
  check_phase_precision(static_cast<std::int64_t>(K), points.bits);
  DiscrepancyResult r = star_discrepancy(points);
  const long double N = static_cast<long double>(points.size());
  long double bound = N / (K + 1);
  long double slack = 0;
  for (unsigned m = 1; m <= K; ++m) {
    const ExpSum s = exp_sum(points, m, 1, 0);
    bound += 3 * s.modulus() / m;
    slack += 3 * s.error / m;
  }
  r.K = K;
  r.et_bound = bound;
  r.slack = slack;
  return r;
}

ErdosTuranSweep erdos_turan_sweep(const FixedPoints& points,
                                  std::span<const unsigned> Ks) {
  if (Ks.empty()) throw ConfigError("Erdos-Turan sweep needs at least one K");
  ErdosTuranSweep sweep;
  for (unsigned K : Ks) {
    sweep.rows.push_back(erdos_turan(points, K));
    if (*sweep.rows.back().et_bound < *sweep.rows[sweep.best].et_bound) {
      sweep.best = sweep.rows.size() - 1;
    }
  }
  return sweep;
}

// --- histograms and Weyl profiles -------------------------------------------

std::uint64_t Histogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

long double Histogram::max_deviation() const {
  const long double N = static_cast<long double>(total());
  if (N == 0) return 0;
  long double worst = 0;
  for (auto c : counts) {
    worst = std::max(worst, std::fabs(static_cast<long double>(c) / N - 1.0L / bins));
  }
  return worst;
}

Histogram half_distance_histogram(std::uint64_t x, unsigned bins, unsigned bits,
                                  unsigned workers) {
  if (x < 1) throw ConfigError("histogram needs x >= 1");
  if (bins < 2) throw ConfigError("histogram needs at least 2 bins");
  check_point_bits(bits);
  if (bits + std::bit_width(bins) + 2 > 127) {
    throw ConfigError("histogram bits too large for the bin count");
  }
  const u128 one = u128{1} << bits;
  const u128 half = one >> 1;
  const u128 scale = 2 * static_cast<u128>(bins);
  // Two ulps of d, measured in the scaled coordinate d * 2 bins * 2^bits.
  const u128 margin = 2 * scale;

  struct Partial {
    std::vector<std::uint64_t> counts;
    std::uint64_t flagged = 0;
  };
  auto parts = map_chunks(
      ChunkPlan{1, x, kDefaultChunk}, workers,
      [&](std::uint64_t a, std::uint64_t b) {
        Partial part;
        part.counts.assign(bins, 0);
        for (std::uint64_t n = a; n <= b; ++n) {
          const u128 m = frac_sqrt_u128(n, bits);
          const u128 d = m < half ? m : one - m;
          if (d == 0) {
            ++part.counts[0];
            continue;
          }
          const u128 q = d * scale;
          const u128 whole = q >> bits;
          const u128 rem = q & (one - 1);
          // Bin ((j-1)/(2 bins), j/(2 bins)]: j = ceil(q / 2^bits).
          u128 j = whole + (rem != 0 ? 1 : 0);
          if (rem < margin && whole >= 1) {
            j = whole;  // just above an edge: lower neighbour
            ++part.flagged;
          } else if (one - rem < margin && rem != 0) {
            ++part.flagged;  // just below an edge: already the lower bin
          }
          j = std::clamp<u128>(j, 1, bins);
          ++part.counts[static_cast<std::size_t>(j - 1)];
        }
        return part;
      });

  Histogram h;
  h.x = x;
  h.bins = bins;
  h.bits = bits;
  h.counts.assign(bins, 0);
  for (const Partial& p : parts) {
    for (unsigned b = 0; b < bins; ++b) h.counts[b] += p.counts[b];
    h.flagged += p.flagged;
  }
  return h;
}

std::vector<WeylRow> weyl_profile(std::uint64_t N, unsigned m_max, unsigned bits,
                                  unsigned workers) {
  if (N < 1) throw ConfigError("Weyl profile needs N >= 1");
  if (m_max < 1) throw ConfigError("Weyl profile needs m_max >= 1");
  check_phase_precision(static_cast<std::int64_t>(m_max), bits);
  const FixedPoints points = frac_points(1, N, bits, workers);
  std::vector<WeylRow> rows;
  rows.reserve(m_max);
  const long double count = static_cast<long double>(N);
  for (unsigned m = 1; m <= m_max; ++m) {
    const ExpSum s = exp_sum(points, m, 1, 1);
    rows.push_back({static_cast<std::int64_t>(m), s.modulus() / count, s.error / count});
  }
  return rows;
}

}  // namespace cannonball
