#include "cannonball/exactseq.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "cannonball/errors.hpp"

namespace cannonball {

namespace {

// Scratch registers for the per-term GMP work; one set per thread.
struct Scratch {
  BigInt p, root, shifted, tmp;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

HalfSide side_of(u128 p, u128 f) {
  const u128 twice = 2 * f + 1;
  return 4 * p < twice * twice ? HalfSide::BelowHalf : HalfSide::AboveHalf;
}

Term big_term(std::uint64_t n) {
  Term t;
  t.n = n;
  t.p = pyramidal(n);
  t.f = isqrt(t.p);
  const BigInt twice = 2 * t.f + 1;
  t.side = 4 * t.p < twice * twice ? HalfSide::BelowHalf : HalfSide::AboveHalf;
  const BigInt below = t.p - t.f * t.f;
  const BigInt above = (t.f + 1) * (t.f + 1) - t.p;
  // The half side and the nearest square agree: 2p <= 2f^2 + 2f exactly when
  // 4p < (2f+1)^2.
  if (below <= above) {
    t.y = t.f;
    t.a = below;
  } else {
    t.y = t.f + 1;
    t.a = above;
  }
  return t;
}

}  // namespace

const char* to_string(HalfSide side) {
  return side == HalfSide::BelowHalf ? "below" : "above";
}

long double FixedFrac::value() const {
  // Top 64 bits are enough for a long double.
  const BigInt top = bits > 64 ? BigInt(mantissa >> (bits - 64)) : mantissa;
  const int shift = bits > 64 ? 64 : static_cast<int>(bits);
  return std::ldexp(static_cast<long double>(top.convert_to<std::uint64_t>()),
                    -shift);
}

void RangeSpec::validate() const {
  if (lo < 1) throw ConfigError("range must start at n >= 1");
  if (lo > hi) {
    throw ConfigError("empty range: lo " + std::to_string(lo) + " > hi " +
                      std::to_string(hi));
  }
  if (chunk < 1) throw ConfigError("chunk must be positive");
}

BigInt pyramidal(std::uint64_t n) {
  BigInt big_n = n;
  return big_n * (big_n + 1) * (2 * big_n + 1) / 6;
}

u128 pyramidal_u128(std::uint64_t n) {
  // Divide the even factor first so the product stays exact in 128 bits.
  u128 a = n;
  u128 b = static_cast<u128>(n) + 1;
  u128 c = 2 * static_cast<u128>(n) + 1;
  if (a % 2 == 0) a /= 2; else b /= 2;
  if (a % 3 == 0) a /= 3; else if (b % 3 == 0) b /= 3; else c /= 3;
  return a * b * c;
}

BigInt nearest_square_root(const BigInt& p) {
  if (p < 0) throw std::domain_error("nearest square of a negative integer");
  const BigInt f = isqrt(p);
  const BigInt below = p - f * f;
  const BigInt above = (f + 1) * (f + 1) - p;
  return below <= above ? f : BigInt(f + 1);
}

CompactTerm compact_term(std::uint64_t n) {
  CompactTerm t;
  t.n = n;
  t.p = pyramidal_u128(n);
  t.f = isqrt(t.p);
  t.side = side_of(t.p, t.f);
  t.a = t.side == HalfSide::BelowHalf
            ? static_cast<std::uint64_t>(t.p - t.f * t.f)
            : static_cast<std::uint64_t>((t.f + 1) * (t.f + 1) - t.p);
  return t;
}

Term term(std::uint64_t n, std::uint64_t fast_path_limit) {
  if (n > std::min(fast_path_limit, kFastPathLimit)) return big_term(n);
  const CompactTerm c = compact_term(n);
  Term t;
  t.n = n;
  t.p = to_big(c.p);
  t.f = to_big(c.f);
  t.y = to_big(c.y());
  t.a = c.a;
  t.side = c.side;
  return t;
}

namespace {

// mantissa = isqrt(P_n * 4^bits) - floor(sqrt(P_n)) * 2^bits, left in s.root.
void frac_mantissa_into(Scratch& s, std::uint64_t n, unsigned bits) {
  mpz_ptr p = s.p.backend().data();
  mpz_ptr root = s.root.backend().data();
  mpz_ptr shifted = s.shifted.backend().data();
  mpz_ptr tmp = s.tmp.backend().data();
  if (n <= kFastPathLimit) {
    const u128 pv = pyramidal_u128(n);
    const std::uint64_t words[2] = {static_cast<std::uint64_t>(pv),
                                    static_cast<std::uint64_t>(pv >> 64)};
    mpz_import(p, 2, -1, sizeof(std::uint64_t), 0, 0, words);
  } else {
    mpz_set(p, pyramidal(n).backend().data());
  }
  mpz_mul_2exp(shifted, p, 2 * bits);
  isqrt_into(root, shifted, tmp);
  isqrt_into(shifted, p, tmp);
  mpz_mul_2exp(shifted, shifted, bits);
  mpz_sub(root, root, shifted);
}

void check_bits(unsigned bits, unsigned max_bits) {
  if (bits < 32 || bits > max_bits) {
    throw ConfigError("fixed-point width must be in [32, " +
                      std::to_string(max_bits) + "], got " +
                      std::to_string(bits));
  }
}

}  // namespace

u128 frac_sqrt_u128(std::uint64_t n, unsigned bits) {
  check_bits(bits, 128);
  Scratch& s = scratch();
  frac_mantissa_into(s, n, bits);
  return to_u128(s.root);
}

FixedFrac frac_sqrt(std::uint64_t n, unsigned bits) {
  check_bits(bits, 1u << 16);
  Scratch& s = scratch();
  frac_mantissa_into(s, n, bits);
  return FixedFrac{s.root, bits, 1};
}

bool in_exceptional(std::uint64_t n) {
  const Term t = term(n);
  // Nearest square: f wins iff p - f^2 <= (f+1)^2 - p, i.e. 2p <= f^2 + (f+1)^2.
  const BigInt square_root =
      2 * t.p <= t.f * t.f + (t.f + 1) * (t.f + 1) ? t.f : BigInt(t.f + 1);
  // Nearest integer to sqrt(p): f iff sqrt(p) < f + 1/2, i.e. 4p < (2f+1)^2.
  const BigInt twice = 2 * t.f + 1;
  const BigInt integer_root = 4 * t.p < twice * twice ? t.f : BigInt(t.f + 1);
  return square_root != integer_root;
}

std::vector<std::uint64_t> exceptional_members(std::uint64_t x,
                                               unsigned workers) {
  if (x < 1) return {};
  const ChunkPlan plan{1, x, kDefaultChunk};
  auto parts = map_chunks(plan, workers, [](std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::uint64_t> found;
    for (std::uint64_t n = lo; n <= hi; ++n) {
      if (in_exceptional(n)) found.push_back(n);
    }
    return found;
  });
  std::vector<std::uint64_t> all;
  for (auto& part : parts) all.insert(all.end(), part.begin(), part.end());
  return all;
}

bool in_upper_half_window(std::uint64_t n) {
  // 1/2 < {sqrt p} < 1/2 + 1/sqrt p
  //   <=>  (2f+1)^2 < 4p  and  4(p-1)^2 < (2f+1)^2 p
  const Term t = term(n);
  const BigInt twice = 2 * t.f + 1;
  const BigInt sq = twice * twice;
  return sq < 4 * t.p && 4 * (t.p - 1) * (t.p - 1) < sq * t.p;
}

bool in_lower_half_window(std::uint64_t n) {
  // 1/2 - 1/sqrt p < {sqrt p} < 1/2
  //   <=>  4p < (2f+1)^2  and  (2f+1)^2 p < 4(p+1)^2
  const Term t = term(n);
  const BigInt twice = 2 * t.f + 1;
  const BigInt sq = twice * twice;
  return 4 * t.p < sq && sq * t.p < 4 * (t.p + 1) * (t.p + 1);
}

NearHalfCount near_half_count(std::uint64_t x, unsigned bits,
                              unsigned workers) {
  if (x < 1) throw ConfigError("near-half count needs x >= 1");
  check_bits(bits, 1u << 16);
  // Window edge in ulps: the largest t with t^4 x^3 <= 2^(4 bits).
  BigInt cube = x;
  cube = cube * cube * cube;
  const BigInt edge = isqrt(isqrt(BigInt(BigInt(1) << (4 * bits)) / cube));
  const BigInt half = BigInt(1) << (bits - 1);
  constexpr int kMarginUlps = 2;

  struct Partial {
    std::uint64_t count = 0;
    std::uint64_t borderline = 0;
  };
  const ChunkPlan plan{1, x, kDefaultChunk};
  auto parts = map_chunks(plan, workers, [&](std::uint64_t lo, std::uint64_t hi) {
    Partial part;
    Scratch& s = scratch();
    BigInt offset;
    for (std::uint64_t n = lo; n <= hi; ++n) {
      frac_mantissa_into(s, n, bits);
      if (s.root == 0) continue;  // perfect square, {sqrt P_n} = 0
      offset = s.root - half;
      if (offset < 0) offset = -offset;
      // The true offset lies within one ulp of `offset`.
      if (offset + kMarginUlps < edge) {
        ++part.count;
      } else if (offset <= edge + kMarginUlps) {
        ++part.borderline;
      }
    }
    return part;
  });
  NearHalfCount result{x, bits, 0, 0};
  for (const Partial& p : parts) {
    result.count += p.count;
    result.borderline += p.borderline;
  }
  return result;
}

void stream_terms(const RangeSpec& range,
                  const std::function<void(const Term&)>& sink) {
  range.validate();
  for (std::uint64_t n = range.lo;; ++n) {
    sink(term(n));
    if (n == range.hi) break;
  }
}

std::vector<Term> collect_terms(const RangeSpec& range, unsigned workers) {
  range.validate();
  auto parts = map_chunks(range.plan(), workers,
                          [](std::uint64_t lo, std::uint64_t hi) {
                            std::vector<Term> out;
                            out.reserve(hi - lo + 1);
                            for (std::uint64_t n = lo; n <= hi; ++n) {
                              out.push_back(term(n));
                            }
                            return out;
                          });
  std::vector<Term> all;
  all.reserve(range.hi - range.lo + 1);
  for (auto& part : parts) {
    std::move(part.begin(), part.end(), std::back_inserter(all));
  }
  return all;
}

Real sqrt_pyramidal(std::uint64_t n) {
  return sqrt(Real(pyramidal(n)));
}

Real two_term_expansion(std::uint64_t n) {
  const Real rn = n;
  const Real root3 = sqrt(Real(3));
  return rn * sqrt(rn) / root3 + root3 * sqrt(rn) / 4;
}

}  // namespace cannonball
