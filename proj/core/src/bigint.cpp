#include "cannonball/bigint.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace cannonball {

namespace {

constexpr u128 kMaxRoot = UINT64_MAX;

u128 mpz_to_u128(mpz_srcptr v) {
  std::uint64_t words[2] = {0, 0};
  std::size_t count = 0;
  mpz_export(words, &count, -1, sizeof(std::uint64_t), 0, 0, v);
  return (static_cast<u128>(words[1]) << 64) | words[0];
}

void u128_to_mpz(mpz_ptr out, u128 v) {
  const std::uint64_t words[2] = {static_cast<std::uint64_t>(v),
                                  static_cast<std::uint64_t>(v >> 64)};
  mpz_import(out, 2, -1, sizeof(std::uint64_t), 0, 0, words);
}

}  // namespace

BigInt to_big(u128 v) {
  BigInt out;
  u128_to_mpz(out.backend().data(), v);
  return out;
}

u128 to_u128(const BigInt& v) {
  if (v < 0 || (v != 0 && msb(v) >= 128)) {
    throw std::range_error("value does not fit in 128 bits");
  }
  return mpz_to_u128(v.backend().data());
}

std::string to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string to_string(const Real& v, int digits) {
  return v.str(digits, std::ios_base::fmtflags(0));
}

u128 isqrt(u128 n) {
  if (n < 2) return n;
  u128 r = static_cast<u128>(std::sqrt(static_cast<double>(n)));
  r = std::clamp<u128>(r, 1, kMaxRoot);
  // One Newton step from the seed lands at or just above the root.
  r = (r + n / r) / 2;
  r = std::min(r, kMaxRoot);
  [[maybe_unused]] int corrections = 0;
  while (r * r > n) {
    --r;
    ++corrections;
  }
  while (r < kMaxRoot && (r + 1) * (r + 1) <= n) {
    ++r;
    ++corrections;
  }
  assert(corrections <= 2);
  return r;
}

void isqrt_into(mpz_ptr root, mpz_srcptr n, mpz_ptr scratch) {
  const std::size_t bits = mpz_sizeinbase(n, 2);
  if (mpz_sgn(n) == 0) {
    mpz_set_ui(root, 0);
    return;
  }
  if (bits <= 127) {
    u128_to_mpz(root, isqrt(mpz_to_u128(n)));
    return;
  }
  // n = m * 2^e with m in [0.5, 1); fold an odd exponent into m.
  long e = 0;
  double m = mpz_get_d_2exp(&e, n);
  if (e & 1) {
    m *= 2.0;
    --e;
  }
  // Seed strictly above sqrt(n): inflate the 53-bit estimate and add one.
  const double s = std::sqrt(m) * (1.0 + 0x1p-40);
  mpz_set_d(root, std::ldexp(s, 53));
  mpz_mul_2exp(root, root, static_cast<mp_bitcnt_t>(e / 2 - 53));
  mpz_add_ui(root, root, 1);
  // Decreasing Newton iteration; the first non-decrease is at floor(sqrt(n)).
  for (;;) {
    mpz_tdiv_q(scratch, n, root);
    mpz_add(scratch, scratch, root);
    mpz_fdiv_q_2exp(scratch, scratch, 1);
    if (mpz_cmp(scratch, root) >= 0) break;
    mpz_swap(scratch, root);
  }
#ifndef NDEBUG
  mpz_mul(scratch, root, root);
  assert(mpz_cmp(scratch, n) <= 0);
  mpz_add_ui(scratch, root, 1);
  mpz_mul(scratch, scratch, scratch);
  assert(mpz_cmp(scratch, n) > 0);
#endif
}

BigInt isqrt(const BigInt& n) {
  if (n < 0) throw std::domain_error("isqrt of a negative integer");
  BigInt root;
  BigInt scratch;
  isqrt_into(root.backend().data(), n.backend().data(),
             scratch.backend().data());
  return root;
}

BigInt isqrt_ceil(const BigInt& n) {
  BigInt r = isqrt(n);
  if (r * r < n) ++r;
  return r;
}

}  // namespace cannonball
