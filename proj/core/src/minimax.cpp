#include "cannonball/minimax.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace cannonball {

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

long long parse_integer(std::string_view s, std::string_view whole) {
  s = trim(s);
  if (s.empty()) throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
  long long v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("malformed rational '" + std::string(whole) + "'");
    }
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace

Rational parse_rational_sum(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty rational");
  Rational total = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    int sign = 1;
    if (text[pos] == '+' || text[pos] == '-') {
      sign = text[pos] == '-' ? -1 : 1;
      ++pos;
    }
    std::size_t end = pos;
    while (end < text.size() && text[end] != '+' && text[end] != '-') ++end;
    const std::string_view token = text.substr(pos, end - pos);
    const std::size_t slash = token.find('/');
    long long num = 0;
    long long den = 1;
    if (slash == std::string_view::npos) {
      num = parse_integer(token, whole);
    } else {
      num = parse_integer(token.substr(0, slash), whole);
      den = parse_integer(token.substr(slash + 1), whole);
      if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(whole) + "'");
    }
    total += Rational(sign * num, den);
    pos = end;
  }
  return total;
}

// --- Monomial ---------------------------------------------------------------

Monomial::Monomial(std::map<std::string, Rational> exponents, double coeff_log)
    : exponents_(std::move(exponents)), coeff_log_(coeff_log) {
  normalize();
}

void Monomial::normalize() {
  std::erase_if(exponents_, [](const auto& kv) { return kv.second.numerator() == 0; });
}

Monomial Monomial::parse(std::string_view text) {
  std::map<std::string, Rational> exps;
  text = trim(text);
  if (text.empty() || text == "1") return Monomial{};
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = trim(text.substr(pos, end - pos));
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos || colon == 0) {
      throw std::invalid_argument("monomial factor '" + std::string(item) +
                                  "' is not of the form var:exponent");
    }
    const std::string var(trim(item.substr(0, colon)));
    exps[var] += parse_rational_sum(item.substr(colon + 1));
    pos = end + 1;
  }
  return Monomial(std::move(exps));
}

Rational Monomial::exponent(const std::string& var) const {
  auto it = exponents_.find(var);
  return it == exponents_.end() ? Rational(0) : it->second;
}

Monomial Monomial::operator*(const Monomial& other) const {
  auto exps = exponents_;
  for (const auto& [v, e] : other.exponents_) exps[v] += e;
  return Monomial(std::move(exps), coeff_log_ + other.coeff_log_);
}

Monomial Monomial::pow(const Rational& e) const {
  auto exps = exponents_;
  for (auto& [v, x] : exps) x *= e;
  return Monomial(std::move(exps), coeff_log_ * boost::rational_cast<double>(e));
}

Monomial Monomial::substitute(const std::string& var, const Monomial& value) const {
  const Rational e = exponent(var);
  auto exps = exponents_;
  exps.erase(var);
  return Monomial(std::move(exps), coeff_log_) * value.pow(e);
}

bool Monomial::same_exponents(const Monomial& other) const {
  return exponents_ == other.exponents_;
}

bool Monomial::dominated_by(const Monomial& other, const std::string& var) const {
  auto mine = exponents_;
  auto theirs = other.exponents_;
  const Rational a = exponent(var);
  const Rational b = other.exponent(var);
  mine.erase(var);
  theirs.erase(var);
  return mine == theirs && a <= b;
}

double Monomial::evaluate(const std::map<std::string, double>& env) const {
  double log_value = coeff_log_;
  for (const auto& [v, e] : exponents_) {
    auto it = env.find(v);
    if (it == env.end()) throw std::invalid_argument("no value bound for variable " + v);
    log_value += boost::rational_cast<double>(e) * std::log(it->second);
  }
  return std::exp(log_value);
}

std::string Monomial::to_string() const {
  if (exponents_.empty()) return "1";
  std::string out;
  for (const auto& [v, e] : exponents_) {
    if (!out.empty()) out += ',';
    out += v + ":" + cannonball::to_string(e);
  }
  return out;
}

// --- exponent mode ----------------------------------------------------------

const Monomial& ExponentSolution::argmin() const {
  if (!active) throw std::logic_error("crossings in " + variable + " cannot be ordered");
  return crossings[*active];
}

const Monomial& ExponentSolution::value() const {
  if (!active) throw std::logic_error("crossings in " + variable + " cannot be ordered");
  return values[*active];
}

ExponentSolution solve_exponents(const Monomial& F, const std::vector<Monomial>& Gs,
                                 const std::string& variable,
                                 const std::string& asymptotic) {
  const Rational a = F.exponent(variable);
  if (a >= 0) {
    throw InvalidProblemError("F must decrease in " + variable + ", exponent is " +
                              to_string(a));
  }
  if (Gs.empty()) throw InvalidProblemError("need at least one increasing term");

  ExponentSolution sol;
  sol.variable = variable;
  sol.asymptotic = asymptotic;
  const Monomial rest_f = F.substitute(variable, Monomial{});
  for (std::size_t j = 0; j < Gs.size(); ++j) {
    const Monomial& G = Gs[j];
    const Rational b = G.exponent(variable);
    if (b < 0) {
      throw InvalidProblemError("G" + std::to_string(j + 1) + " must not decrease in " +
                                variable + ", exponent is " + to_string(b));
    }
    const Monomial rest_g = G.substitute(variable, Monomial{});
    const Rational diff = a - b;
    if (diff.numerator() == 0) {
      // Unreachable with a < 0 <= b; kept for callers that relax the signs.
      if (rest_f.same_exponents(rest_g) && rest_f.coeff_log() == rest_g.coeff_log()) {
        sol.boundary.push_back(j);
        sol.crossings.emplace_back();
        sol.values.push_back(F);
        continue;
      }
      throw NoCrossingError(j, "G" + std::to_string(j + 1) + " never crosses F in " +
                                   variable);
    }
    // var^(a-b) = rest_g / rest_f
    const Monomial ratio = rest_g * rest_f.pow(Rational(-1));
    Monomial crossing = ratio.pow(Rational(1) / diff);
    sol.values.push_back(F.substitute(variable, crossing));
    sol.crossings.push_back(std::move(crossing));
  }

  // Order crossings when each is a pure power of the asymptotic variable.
  // A lone crossing needs no ordering.
  const bool lone = sol.crossings.size() - sol.boundary.size() == 1;
  bool comparable = true;
  for (std::size_t j = 0; j < sol.crossings.size() && !lone; ++j) {
    if (std::find(sol.boundary.begin(), sol.boundary.end(), j) != sol.boundary.end()) continue;
    for (const auto& [v, e] : sol.crossings[j].exponents()) {
      if (v != asymptotic) comparable = false;
    }
  }
  if (comparable) {
    for (std::size_t j = 0; j < sol.crossings.size(); ++j) {
      if (std::find(sol.boundary.begin(), sol.boundary.end(), j) != sol.boundary.end()) continue;
      if (!sol.active) {
        sol.active = j;
        continue;
      }
      const Monomial& best = sol.crossings[*sol.active];
      const Monomial& cand = sol.crossings[j];
      const Rational eb = best.exponent(asymptotic);
      const Rational ec = cand.exponent(asymptotic);
      if (ec < eb || (ec == eb && cand.coeff_log() < best.coeff_log())) sol.active = j;
    }
  }
  return sol;
}

Rational MomentErrorChain::final_exponent() const {
  return eliminate_k.value().exponent("x");
}

MomentErrorChain moment_error_chain(const Rational& k) {
  const Rational e = Rational(3, 2) * k;
  auto mono = [](std::map<std::string, Rational> exps) { return Monomial(std::move(exps)); };

  MomentErrorChain chain;
  chain.k = k;

  // Chunk count M: F(M) = x^(e+1)/M against G(M) = L M x^(e+1/4) / K^(1/2).
  chain.eliminate_m = solve_exponents(
      mono({{"x", e + 1}, {"M", -1}}),
      {mono({{"L", 1}, {"M", 1}, {"K", Rational(-1, 2)}, {"x", e + Rational(1, 4)}})},
      "M");

  // Bin count L, with the M step's balanced term as the last G.
  const Monomial f_l = mono({{"x", e + 1}, {"L", -1}});
  std::vector<Monomial> g_l = {
      mono({{"L", 1}, {"x", e + 1}, {"K", -1}}),
      mono({{"L", 1}, {"K", Rational(1, 2)}, {"x", e + Rational(3, 4)}}),
      mono({{"L", 1}, {"K", 1}, {"x", e + Rational(1, 2)}}),
      mono({{"L", 1}, {"x", e + Rational(1, 4)}}),
      chain.eliminate_m.values.front(),
  };
  chain.l_terms.push_back(f_l);
  chain.l_terms.insert(chain.l_terms.end(), g_l.begin(), g_l.end());
  chain.eliminate_l = solve_exponents(f_l, g_l, "L");

  // Truncation K: split the L step's terms by monotonicity in K and drop
  // decreasing terms dominated by an increasing one.
  std::vector<Monomial> decreasing;
  std::vector<Monomial> increasing;
  for (const Monomial& term : chain.eliminate_l.values) {
    (term.exponent("K") < 0 ? decreasing : increasing).push_back(term);
  }
  std::vector<Monomial> kept;
  for (const Monomial& term : decreasing) {
    const bool absorbed = std::any_of(increasing.begin(), increasing.end(),
                                      [&](const Monomial& g) { return term.dominated_by(g, "K"); });
    (absorbed ? chain.absorbed : kept).push_back(term);
  }
  if (kept.size() != 1) {
    throw InvalidProblemError("expected exactly one undominated decreasing term in K, found " +
                              std::to_string(kept.size()));
  }
  chain.k_terms.push_back(kept.front());
  chain.k_terms.insert(chain.k_terms.end(), increasing.begin(), increasing.end());
  chain.eliminate_k = solve_exponents(kept.front(), increasing, "K");
  return chain;
}

// --- numeric mode -----------------------------------------------------------

namespace {

double log_point(double lo, double hi, double frac) {
  return lo * std::pow(hi / lo, frac);
}

void check_domain(const MinMaxProblem& p) {
  if (!p.F || p.Gs.empty()) throw InvalidProblemError("problem needs F and at least one G");
  if (!(p.lo > 0 && p.hi > p.lo && std::isfinite(p.hi))) {
    throw InvalidProblemError("domain must satisfy 0 < lo < hi < inf");
  }
}

}  // namespace

void validate_problem(const MinMaxProblem& problem) {
  check_domain(problem);
  std::vector<double> ts;
  for (int i = 0; i < kMonotonicitySamples; ++i) {
    ts.push_back(log_point(problem.lo, problem.hi, (i + 0.5) / kMonotonicitySamples));
  }
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(problem.F(ts[i]) < problem.F(ts[i - 1]))) {
      throw InvalidProblemError("F is not strictly decreasing near t = " + std::to_string(ts[i]));
    }
    for (std::size_t j = 0; j < problem.Gs.size(); ++j) {
      if (problem.Gs[j](ts[i]) < problem.Gs[j](ts[i - 1])) {
        throw InvalidProblemError("G" + std::to_string(j + 1) +
                                  " decreases near t = " + std::to_string(ts[i]));
      }
    }
  }
}

NumericSolution solve_numeric(const MinMaxProblem& problem, double tol) {
  if (!(tol > 0)) throw InvalidProblemError("tolerance must be positive");
  validate_problem(problem);
  NumericSolution sol;
  sol.tol = tol;
  for (std::size_t j = 0; j < problem.Gs.size(); ++j) {
    const auto& G = problem.Gs[j];
    auto gap = [&](double t) { return problem.F(t) - G(t); };
    double a = problem.lo;
    double b = problem.hi;
    if (!(gap(a) >= 0 && gap(b) <= 0)) {
      throw NoCrossingError(j, "F - G" + std::to_string(j + 1) +
                                   " does not change sign on the domain");
    }
    for (int iter = 0; iter < 400 && b / a - 1 > tol; ++iter) {
      const double mid = std::sqrt(a * b);
      if (gap(mid) > 0) a = mid; else b = mid;
    }
    sol.crossings.push_back(std::sqrt(a * b));
  }
  sol.active = static_cast<std::size_t>(
      std::min_element(sol.crossings.begin(), sol.crossings.end()) - sol.crossings.begin());
  sol.argmin = sol.crossings[sol.active];
  sol.value = problem.F(sol.argmin);
  double g_max = -INFINITY;
  for (const auto& G : problem.Gs) g_max = std::max(g_max, G(sol.argmin));
  sol.residual = std::fabs(sol.value - g_max);
  return sol;
}

bool verify_solution(const MinMaxProblem& problem, const NumericSolution& solution,
                     unsigned samples) {
  check_domain(problem);
  auto envelope = [&](double t) {
    double h = problem.F(t);
    for (const auto& G : problem.Gs) h = std::max(h, G(t));
    return h;
  };
  // Slack covers the bisection tolerance on both the crossing and the value.
  const double slack = std::max(solution.tol, 1e-12) * 4;
  const double at_argmin = envelope(solution.argmin);
  if (std::fabs(at_argmin - solution.value) > slack * std::fabs(solution.value) + solution.residual) {
    return false;
  }
  for (unsigned i = 0; i < samples; ++i) {
    const double t = log_point(problem.lo, problem.hi,
                               samples == 1 ? 0.5 : static_cast<double>(i) / (samples - 1));
    if (envelope(t) < solution.value * (1 - slack)) return false;
  }
  return true;
}

ScalarFn monomial_function(const Monomial& m, const std::string& var,
                           std::map<std::string, double> env) {
  return [m, var, env = std::move(env)](double t) mutable {
    env[var] = t;
    return m.evaluate(env);
  };
}

}  // namespace cannonball
