#pragma once

// Number types shared by every module, plus integer square roots.
//
// BigInt and BigRational are GMP-backed; Real is an MPFR float carrying
// 50 decimal digits (166 bits), which is the working precision for every
// "high-precision real" the library reports.

#include <cstdint>
#include <string>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace cannonball {

using u128 = unsigned __int128;
using BigInt = boost::multiprecision::mpz_int;
using BigRational = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float_50;

/// Decimal digits used when a Real is serialized.
inline constexpr int kRealDigits = 30;

BigInt to_big(u128 v);

/// Throws std::range_error if v is negative or does not fit in 128 bits.
u128 to_u128(const BigInt& v);

std::string to_string(u128 v);
std::string to_string(const Real& v, int digits = kRealDigits);

/// floor(sqrt(n)). Floating-point seed, one Newton step, then exact
/// correction.
u128 isqrt(u128 n);

/// floor(sqrt(n)) for arbitrary size. Throws std::domain_error on n < 0.
BigInt isqrt(const BigInt& n);

/// Smallest t with t*t >= n.
BigInt isqrt_ceil(const BigInt& n);

/// floor(sqrt(n)) written into `root` using raw GMP calls; `n` must be
/// non-negative. Used by the hot loops to avoid expression temporaries.
void isqrt_into(mpz_ptr root, mpz_srcptr n, mpz_ptr scratch);

}  // namespace cannonball
