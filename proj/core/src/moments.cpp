#include "cannonball/moments.hpp"

#include <cmath>
#include <string>

#include "cannonball/errors.hpp"

namespace cannonball {

namespace {

// 128-bit running sum that spills into a BigInt on overflow.
class WideSum {
 public:
  void add(u128 v) {
    if (__builtin_add_overflow(low_, v, &low_)) {
      spill_ += to_big(low_ - v);
      low_ = v;
    }
  }
  void add(const BigInt& v) { spill_ += v; }
  BigInt total() const { return spill_ + to_big(low_); }

 private:
  u128 low_ = 0;
  BigInt spill_;
};

// a^k in 128 bits, or false on overflow.
bool pow_u128(std::uint64_t a, unsigned k, u128& out) {
  u128 acc = 1;
  for (unsigned i = 0; i < k; ++i) {
    if (__builtin_mul_overflow(acc, static_cast<u128>(a), &acc)) return false;
  }
  out = acc;
  return true;
}

BigInt chunk_moment(std::uint64_t lo, std::uint64_t hi, unsigned k,
                    std::uint64_t fast_limit) {
  WideSum sum;
  u128 power = 0;
  for (std::uint64_t n = lo;; ++n) {
    if (n <= fast_limit) {
      const std::uint64_t a = compact_term(n).a;
      if (pow_u128(a, k, power)) {
        sum.add(power);
      } else {
        sum.add(BigInt(pow(BigInt(a), k)));
      }
    } else {
      sum.add(BigInt(pow(term(n, fast_limit).a, k)));
    }
    if (n == hi) break;
  }
  return sum.total();
}

Real exponent_power(std::uint64_t x, const Real& exponent) {
  return pow(Real(x), exponent);
}

}  // namespace

void check_moment_order(unsigned k) {
  if (k < 1 || k > kMaxMomentOrder) {
    throw ConfigError("moment order k must be in [1, " +
                      std::to_string(kMaxMomentOrder) + "], got " +
                      std::to_string(k));
  }
}

BigInt moment_sum(std::uint64_t lo, std::uint64_t hi, unsigned k,
                  const ReductionOptions& opts) {
  check_moment_order(k);
  if (hi < lo) return 0;
  if (lo < 1) throw ConfigError("moment range must start at n >= 1");
  const std::uint64_t fast_limit = std::min(opts.fast_path_limit, kFastPathLimit);
  auto parts = map_chunks(ChunkPlan{lo, hi, std::max<std::uint64_t>(opts.chunk, 1)},
                          opts.workers, [&](std::uint64_t a, std::uint64_t b) {
                            return chunk_moment(a, b, k, fast_limit);
                          });
  BigInt total = 0;
  for (const BigInt& part : parts) total += part;
  return total;
}

Real main_coefficient(unsigned k) {
  const Real rk = k;
  return 1 / (pow(Real(3), rk / 2) * (3 * rk / 2 + 1) * (rk + 1));
}

Real main_term(std::uint64_t x, unsigned k) {
  return main_coefficient(k) * exponent_power(x, Real(3 * k) / 2 + 1);
}

MomentSummary summarize_moment(std::uint64_t x, unsigned k, BigInt exact) {
  MomentSummary s;
  s.x = x;
  s.k = k;
  s.exact = std::move(exact);
  s.main = main_term(x, k);
  s.residual = Real(s.exact) - s.main;
  s.normalized =
      s.residual / exponent_power(x, Real(3 * k) / 2 + Real(11) / 12);
  return s;
}

MomentSummary moment(std::uint64_t x, unsigned k,
                     const ReductionOptions& opts) {
  if (x < 1) throw ConfigError("moment needs x >= 1");
  return summarize_moment(x, k, moment_sum(1, x, k, opts));
}

Average summarize_average(std::uint64_t x, const BigInt& first_moment) {
  Average avg;
  avg.x = x;
  avg.exact = BigRational(first_moment, BigInt(x));
  avg.value = Real(first_moment) / Real(x);
  avg.main = exponent_power(x, Real(3) / 2) / (5 * sqrt(Real(3)));
  return avg;
}

Average average(std::uint64_t x, const ReductionOptions& opts) {
  if (x < 1) throw ConfigError("average needs x >= 1");
  return summarize_average(x, moment_sum(1, x, 1, opts));
}

std::vector<BigInt> moments_at(std::span<const std::uint64_t> xs, unsigned k,
                               const ReductionOptions& opts) {
  std::vector<BigInt> out;
  out.reserve(xs.size());
  BigInt running = 0;
  std::uint64_t done = 0;
  for (std::uint64_t x : xs) {
    if (x <= done) throw ConfigError("xs must be strictly increasing");
    running += moment_sum(done + 1, x, k, opts);
    out.push_back(running);
    done = x;
  }
  return out;
}

// --- sandwich ---------------------------------------------------------------

void check_bin_count(unsigned L) {
  if (L < 2 || L % 2 != 0) {
    throw ConfigError("bin count L must be even and positive, got " +
                      std::to_string(L));
  }
}

unsigned distance_bin(const Term& t, unsigned L) {
  if (t.a == 0) return 1;
  const BigInt scaled = BigInt(L) * L * t.p;  // (L sqrt P)^2
  BigInt j;
  if (t.side == HalfSide::BelowHalf) {
    j = isqrt_ceil(scaled) - BigInt(L) * t.f;  // ceil(L (sqrt P - f))
  } else {
    j = BigInt(L) * (t.f + 1) - isqrt(scaled);  // ceil(L (f + 1 - sqrt P))
  }
  return j.convert_to<unsigned>();
}

void SandwichPartial::merge(const SandwichPartial& other) {
  if (weight_lo.empty()) {
    *this = other;
    return;
  }
  for (std::size_t j = 0; j < weight_lo.size(); ++j) {
    weight_lo[j] += other.weight_lo[j];
    weight_hi[j] += other.weight_hi[j];
    counts[j] += other.counts[j];
  }
  exact += other.exact;
}

namespace {

SandwichPartial empty_partial(unsigned k, unsigned L, unsigned bits) {
  SandwichPartial p;
  p.k = k;
  p.L = L;
  p.bits = bits;
  p.weight_lo.assign(L / 2, BigInt(0));
  p.weight_hi.assign(L / 2, BigInt(0));
  p.counts.assign(L / 2, 0);
  p.exact = 0;
  return p;
}

SandwichPartial chunk_sandwich(std::uint64_t lo, std::uint64_t hi, unsigned k,
                               unsigned L, unsigned bits,
                               std::uint64_t fast_limit) {
  SandwichPartial part = empty_partial(k, L, bits);
  BigInt root_lo;
  for (std::uint64_t n = lo;; ++n) {
    const Term t = term(n, fast_limit);
    const unsigned j = distance_bin(t, L);
    // sqrt(P) in [s, s + 1] / 2^bits, so sqrt(P) + y in
    // [s + y 2^bits, s + y 2^bits + 1] / 2^bits.
    root_lo = isqrt(BigInt(t.p << (2 * bits))) + (t.y << bits);
    part.weight_lo[j - 1] += pow(root_lo, k);
    part.weight_hi[j - 1] += pow(BigInt(root_lo + 1), k);
    part.counts[j - 1] += 1;
    part.exact += pow(t.a, k);
    if (n == hi) break;
  }
  return part;
}

}  // namespace

SandwichPartial sandwich_partial(std::uint64_t lo, std::uint64_t hi,
                                 unsigned k, unsigned L, unsigned bits,
                                 const ReductionOptions& opts) {
  check_moment_order(k);
  check_bin_count(L);
  if (bits < 8) throw ConfigError("sandwich precision must be >= 8 bits");
  SandwichPartial total = empty_partial(k, L, bits);
  if (hi < lo) return total;
  if (lo < 1) throw ConfigError("sandwich range must start at n >= 1");
  const std::uint64_t fast_limit = std::min(opts.fast_path_limit, kFastPathLimit);
  auto parts = map_chunks(
      ChunkPlan{lo, hi, std::max<std::uint64_t>(opts.chunk, 1)}, opts.workers,
      [&](std::uint64_t a, std::uint64_t b) {
        return chunk_sandwich(a, b, k, L, bits, fast_limit);
      });
  for (const SandwichPartial& p : parts) total.merge(p);
  return total;
}

SandwichResult finish_sandwich(std::uint64_t x, const SandwichPartial& part) {
  SandwichResult r;
  r.x = x;
  r.k = part.k;
  r.L = part.L;
  r.bits = part.bits;
  r.exact = part.exact;
  r.denominator = pow(BigInt(part.L), part.k) << (part.k * part.bits);
  r.lower_num = 0;
  r.upper_num = 0;
  for (std::size_t idx = 0; idx < part.weight_lo.size(); ++idx) {
    const BigInt j = static_cast<unsigned>(idx + 1);
    r.lower_num += pow(BigInt(j - 1), part.k) * part.weight_lo[idx];
    r.upper_num += pow(j, part.k) * part.weight_hi[idx];
  }
  r.lower = Real(r.lower_num) / Real(r.denominator);
  r.upper = Real(r.upper_num) / Real(r.denominator);
  r.bin_counts = part.counts;
  return r;
}

SandwichResult sandwich(std::uint64_t x, unsigned k, unsigned L,
                        const ReductionOptions& opts, unsigned bits) {
  if (x < 1) throw ConfigError("sandwich needs x >= 1");
  return finish_sandwich(x, sandwich_partial(1, x, k, L, bits, opts));
}

bool SandwichResult::certified() const {
  const BigInt scaled = exact * denominator;
  return lower_num <= scaled && scaled <= upper_num;
}

Real SandwichResult::relative_width() const {
  if (upper_num == 0) return Real(0);
  return Real(upper_num - lower_num) / Real(upper_num);
}

// --- fits -------------------------------------------------------------------

FitReport fit_loglog(std::span<const std::uint64_t> xs,
                     std::span<const Real> values) {
  if (xs.size() != values.size()) {
    throw ConfigError("fit needs as many values as abscissae");
  }
  FitReport report;
  report.xs.assign(xs.begin(), xs.end());
  report.values.assign(values.begin(), values.end());

  std::vector<long double> lx;
  std::vector<long double> ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (values[i] == 0) continue;
    lx.push_back(std::log(static_cast<long double>(xs[i])));
    ly.push_back(static_cast<long double>(log(abs(values[i]))));
  }
  if (lx.size() < 3) {
    throw InsufficientDataError("log-log fit needs at least 3 nonzero values, got " +
                                std::to_string(lx.size()));
  }
  const long double m = static_cast<long double>(lx.size());
  long double mean_x = 0;
  long double mean_y = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mean_x += lx[i];
    mean_y += ly[i];
  }
  mean_x /= m;
  mean_y /= m;
  long double sxx = 0;
  long double sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mean_x) * (lx[i] - mean_x);
    sxy += (lx[i] - mean_x) * (ly[i] - mean_y);
  }
  if (sxx == 0) throw InsufficientDataError("log-log fit needs distinct x values");
  report.slope = static_cast<double>(sxy / sxx);
  report.intercept = static_cast<double>(mean_y - (sxy / sxx) * mean_x);
  return report;
}

FitReport fit_residual(std::span<const std::uint64_t> xs, unsigned k,
                       const ReductionOptions& opts) {
  if (xs.size() < 3) {
    throw InsufficientDataError("residual fit needs at least 3 abscissae");
  }
  const std::vector<BigInt> sums = moments_at(xs, k, opts);
  std::vector<Real> residuals;
  residuals.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    residuals.push_back(abs(Real(sums[i]) - main_term(xs[i], k)));
  }
  return fit_loglog(xs, residuals);
}

}  // namespace cannonball
