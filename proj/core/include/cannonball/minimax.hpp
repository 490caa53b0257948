#pragma once

// Balancing one decreasing function against several increasing ones:
//
//   min_t max(F(t), G_1(t), ..., G_i(t)) = F(min_j M_j),  F(M_j) = G_j(M_j).
//
// Two front ends share that rule. The numeric one takes scalar functions on a
// positive interval and locates each crossing by bisection. The exponent one
// takes monomials c * prod v^e with exact rational exponents and solves each
// crossing symbolically, which is how error terms of the form
// x^a K^b L^c M^d are traded against each other.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace cannonball {

using Rational = boost::rational<long long>;

std::string to_string(const Rational& r);

/// Parses "3/2", "-1/2", "3/2+1", "5/2-1/12", "2". Throws std::invalid_argument.
Rational parse_rational_sum(std::string_view text);

class InvalidProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NoCrossingError : public std::runtime_error {
 public:
  NoCrossingError(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// --- monomials --------------------------------------------------------------

class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::map<std::string, Rational> exponents,
                    double coeff_log = 0.0);

  /// "x:3/2+1,K:-1/2". Zero exponents are dropped.
  static Monomial parse(std::string_view text);

  Rational exponent(const std::string& var) const;
  const std::map<std::string, Rational>& exponents() const { return exponents_; }
  double coeff_log() const { return coeff_log_; }

  Monomial operator*(const Monomial& other) const;
  Monomial pow(const Rational& e) const;
  /// Replaces var^e by value^e.
  Monomial substitute(const std::string& var, const Monomial& value) const;
  /// Same exponents (coefficients ignored).
  bool same_exponents(const Monomial& other) const;
  /// True when this is O(other) for var >= 1 with every other exponent equal.
  bool dominated_by(const Monomial& other, const std::string& var) const;

  double evaluate(const std::map<std::string, double>& env) const;

  /// "x:5/2,K:-1/2" in variable order; "1" when empty.
  std::string to_string() const;

 private:
  void normalize();

  std::map<std::string, Rational> exponents_;
  double coeff_log_ = 0.0;
};

struct ExponentSolution {
  std::string variable;
  std::string asymptotic;  // variable used to order crossings, e.g. "x"
  std::vector<Monomial> crossings;  // M_j with F(M_j) = G_j(M_j)
  std::vector<Monomial> values;     // F(M_j)
  /// Index of the smallest crossing when all crossings are powers of the
  /// asymptotic variable alone (or there is only one); empty when they
  /// cannot be ordered.
  std::optional<std::size_t> active;
  /// Gs with the same exponent in `variable` as F and identical remaining
  /// part: they tie with F everywhere and are left out of the ordering.
  std::vector<std::size_t> boundary;

  const Monomial& argmin() const;
  const Monomial& value() const;
};

/// F must have a negative exponent in `variable` and each G a non-negative
/// one (InvalidProblemError otherwise). A G whose exponent in `variable`
/// equals F's never crosses it unless the rest agrees too (NoCrossingError).
ExponentSolution solve_exponents(const Monomial& F, const std::vector<Monomial>& Gs,
                                 const std::string& variable,
                                 const std::string& asymptotic = "x");

/// Three-step elimination of M, then L, then K in the error terms of the
/// binned moment bracket at order k. The final value is x^(3k/2 + 11/12).
struct MomentErrorChain {
  Rational k;
  ExponentSolution eliminate_m;
  std::vector<Monomial> l_terms;  // F and Gs fed to the L step
  ExponentSolution eliminate_l;
  std::vector<Monomial> k_terms;  // F and Gs fed to the K step
  std::vector<Monomial> absorbed;  // terms dropped as dominated before the K step
  ExponentSolution eliminate_k;

  Rational final_exponent() const;
};

MomentErrorChain moment_error_chain(const Rational& k);

// --- numeric mode -----------------------------------------------------------

using ScalarFn = std::function<double(double)>;

struct MinMaxProblem {
  ScalarFn F;
  std::vector<ScalarFn> Gs;
  double lo = 0;  // domain (lo, hi), 0 < lo < hi
  double hi = 0;
};

struct NumericSolution {
  double argmin = 0;
  double value = 0;
  std::vector<double> crossings;
  std::size_t active = 0;  // index of the G crossing first
  double residual = 0;     // |F(argmin) - max_j G_j(argmin)|
  double tol = 0;
};

inline constexpr int kMonotonicitySamples = 16;

/// Samples F and every G at log-spaced points; throws InvalidProblemError if
/// F is not strictly decreasing or some G is decreasing anywhere.
void validate_problem(const MinMaxProblem& problem);

/// Bisection (in log t) for each crossing to relative tolerance `tol`.
NumericSolution solve_numeric(const MinMaxProblem& problem, double tol = 1e-12);

/// True iff H = max(F, G_1, ...) equals `value` at argmin and is at least
/// value (1 - tol) at `samples` log-spaced points of the domain.
bool verify_solution(const MinMaxProblem& problem, const NumericSolution& solution,
                     unsigned samples = 1000);

/// Numeric view of a monomial in one free variable.
ScalarFn monomial_function(const Monomial& m, const std::string& var,
                           std::map<std::string, double> env);

}  // namespace cannonball
