#include "cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "cannonball/equidist.hpp"
#include "cannonball/errors.hpp"
#include "cannonball/exactseq.hpp"
#include "cannonball/minimax.hpp"
#include "cannonball/moments.hpp"
#include "cli/checkpoint.hpp"
#include "cli/emit.hpp"

namespace cannonball::cli {

using cannonball::to_string;

namespace {

// Exit through this when a checkpoint run stops early on --halt-after.
struct Halted {
  std::uint64_t last_n;
};

std::string ld(long double v) {
  std::ostringstream s;
  s << std::setprecision(21) << v;
  return s.str();
}

std::string big(const BigInt& v) { return v.str(); }

std::string rational(const BigRational& q) {
  return numerator(q).str() + "/" + denominator(q).str();
}

ReductionOptions reduction(const RunConfig& cfg) {
  ReductionOptions o;
  o.workers = cfg.workers;
  o.chunk = cfg.chunk;
  return o;
}

// Sums a range in segments of checkpoint_every, saving state after each one.
// `step(lo, hi)` folds one segment into the caller's accumulators; `save`
// and `restore` convert them to and from checkpoint form.
class SegmentedRun {
 public:
  SegmentedRun(const RunConfig& cfg) : cfg_(cfg), fp_(fingerprint(cfg.canonical())) {}

  std::uint64_t resume(const std::function<void(const std::vector<Accumulator>&)>& restore) {
    if (!cfg_.checkpoint) return 0;
    auto cp = load_checkpoint(*cfg_.checkpoint);
    if (!cp) return 0;
    if (cp->command != to_string(cfg_.command) || cp->fingerprint != fp_) {
      throw CheckpointError("checkpoint " + cfg_.checkpoint->string() +
                            " was written for a different configuration; refusing to resume");
    }
    if (cp->last_n > cfg_.x) {
      throw CheckpointError("checkpoint " + cfg_.checkpoint->string() + " is past x");
    }
    restore(cp->accumulators);
    return cp->last_n;
  }

  void drive(std::uint64_t done, std::uint64_t x,
             const std::function<void(std::uint64_t, std::uint64_t)>& step,
             const std::function<std::vector<Accumulator>()>& save) {
    if (!cfg_.checkpoint) {
      if (done < x) step(done + 1, x);
      return;
    }
    const std::uint64_t every = cfg_.checkpoint_every;
    while (done < x) {
      // Segment ends sit on multiples of `every`, so a resumed run cuts the
      // range exactly where an uninterrupted one would.
      const std::uint64_t end = std::min(x, (done / every + 1) * every);
      step(done + 1, end);
      done = end;
      Checkpoint cp;
      cp.command = to_string(cfg_.command);
      cp.fingerprint = fp_;
      cp.last_n = done;
      cp.accumulators = save();
      save_checkpoint(*cfg_.checkpoint, cp);
      if (cfg_.halt_after && done >= *cfg_.halt_after && done < x) throw Halted{done};
    }
  }

 private:
  const RunConfig& cfg_;
  std::string fp_;
};

const std::string& accumulator(const std::vector<Accumulator>& acc, const std::string& name) {
  for (const auto& a : acc) {
    if (a.name == name) return a.value;
  }
  throw CheckpointError("checkpoint lacks accumulator '" + name + "'");
}

BigInt parse_big(const std::string& text) {
  try {
    return BigInt(text);
  } catch (const std::exception&) {
    throw CheckpointError("checkpoint accumulator is not an integer: '" + text + "'");
  }
}

BigInt first_moment_checkpointed(const RunConfig& cfg, unsigned k) {
  SegmentedRun seg(cfg);
  BigInt total = 0;
  const std::uint64_t done = seg.resume([&](const std::vector<Accumulator>& acc) {
    total = parse_big(accumulator(acc, "M_k"));
  });
  seg.drive(
      done, cfg.x,
      [&](std::uint64_t lo, std::uint64_t hi) { total += moment_sum(lo, hi, k, reduction(cfg)); },
      [&] { return std::vector<Accumulator>{{"M_k", big(total)}}; });
  return total;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

Table run_moments(const RunConfig& cfg) {
  const MomentSummary m = summarize_moment(cfg.x, cfg.k, first_moment_checkpointed(cfg, cfg.k));
  return {{"x", "k", "exact", "main", "residual", "normalized"},
          {{Cell::num(m.x), Cell::num(m.k), Cell::str(big(m.exact)), Cell::str(to_string(m.main)),
            Cell::str(to_string(m.residual)), Cell::str(to_string(m.normalized))}}};
}

Table run_average(const RunConfig& cfg) {
  const BigInt m1 = first_moment_checkpointed(cfg, 1);
  const Average a = summarize_average(cfg.x, m1);
  return {{"x", "m1", "exact", "value", "main", "ratio"},
          {{Cell::num(a.x), Cell::str(big(m1)), Cell::str(rational(a.exact)),
            Cell::str(to_string(a.value)), Cell::str(to_string(a.main)),
            Cell::str(to_string(Real(a.value / a.main)))}}};
}

Table run_sandwich(const RunConfig& cfg) {
  SegmentedRun seg(cfg);
  SandwichPartial total = sandwich_partial(1, 0, cfg.k, cfg.L, cfg.bits);
  const std::size_t nbins = total.weight_lo.size();
  const std::uint64_t done = seg.resume([&](const std::vector<Accumulator>& acc) {
    total.exact = parse_big(accumulator(acc, "M_k"));
    for (std::size_t j = 0; j < nbins; ++j) {
      const std::string idx = std::to_string(j + 1);
      total.weight_lo[j] = parse_big(accumulator(acc, "W_lo_" + idx));
      total.weight_hi[j] = parse_big(accumulator(acc, "W_hi_" + idx));
      total.counts[j] = parse_big(accumulator(acc, "count_" + idx)).convert_to<std::uint64_t>();
    }
  });
  seg.drive(
      done, cfg.x,
      [&](std::uint64_t lo, std::uint64_t hi) {
        total.merge(sandwich_partial(lo, hi, cfg.k, cfg.L, cfg.bits, reduction(cfg)));
      },
      [&] {
        std::vector<Accumulator> acc{{"M_k", big(total.exact)}};
        for (std::size_t j = 0; j < nbins; ++j) {
          const std::string idx = std::to_string(j + 1);
          acc.push_back({"W_lo_" + idx, big(total.weight_lo[j])});
          acc.push_back({"W_hi_" + idx, big(total.weight_hi[j])});
          acc.push_back({"count_" + idx, std::to_string(total.counts[j])});
        }
        return acc;
      });
  const SandwichResult r = finish_sandwich(cfg.x, total);
  return {{"x", "k", "L", "lower", "exact", "upper", "certified", "relative_width"},
          {{Cell::num(r.x), Cell::num(r.k), Cell::num(r.L), Cell::str(to_string(r.lower)),
            Cell::str(big(r.exact)), Cell::str(to_string(r.upper)), Cell::flag(r.certified()),
            Cell::str(to_string(r.relative_width()))}}};
}

void run_terms(const RunConfig& cfg, std::ostream& out) {
  RowWriter w(out, cfg.format, {"n", "p", "f", "y", "a", "side"});
  // Collect in bounded blocks so long ranges stream with flat memory.
  const std::uint64_t block = cfg.chunk * std::max(1u, cfg.workers) * 4;
  for (std::uint64_t lo = cfg.lo; lo <= cfg.hi;) {
    const std::uint64_t hi = (cfg.hi - lo < block - 1) ? cfg.hi : lo + block - 1;
    for (const Term& t : collect_terms(RangeSpec{lo, hi, cfg.chunk}, cfg.workers)) {
      w.write({Cell::num(t.n), Cell::str(big(t.p)), Cell::str(big(t.f)), Cell::str(big(t.y)),
               Cell::str(big(t.a)), Cell::str(to_string(t.side))});
    }
    if (hi == cfg.hi) break;
    lo = hi + 1;
  }
  w.finish();
}

Table run_discrepancy(const RunConfig& cfg) {
  const FixedPoints pts = frac_points(1, cfg.x, cfg.bits, cfg.workers);
  const ErdosTuranSweep sweep = erdos_turan_sweep(pts, cfg.Ks);
  Table t{{"N", "K", "d_unnormalized", "d_star", "et_bound", "slack", "holds", "best"}, {}};
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const DiscrepancyResult& r = sweep.rows[i];
    t.rows.push_back({Cell::num(r.N), Cell::num(*r.K), Cell::str(ld(r.d_unnormalized)),
                      Cell::str(ld(r.d_star)), Cell::str(ld(*r.et_bound)), Cell::str(ld(r.slack)),
                      Cell::flag(r.bound_holds()), Cell::flag(i == sweep.best)});
  }
  return t;
}

Table run_weyl(const RunConfig& cfg) {
  Table t{{"N", "m", "normalized", "error"}, {}};
  for (const WeylRow& r : weyl_profile(cfg.x, cfg.m_max, cfg.bits, cfg.workers)) {
    t.rows.push_back({Cell::num(cfg.x), Cell::num(static_cast<long long>(r.m)),
                      Cell::str(ld(r.normalized)), Cell::str(ld(r.error))});
  }
  return t;
}

Table run_knbound(const RunConfig& cfg) {
  Table t{{"lo", "hi", "m", "abs_sum", "error", "kn_bound", "holds"}, {}};
  for (unsigned m = 1; m <= cfg.m_max; ++m) {
    const ExpSum s = exp_sum(cfg.lo, cfg.hi, m, cfg.bits, cfg.workers);
    const long double bound = s.kn_bound.value_or(0);
    t.rows.push_back({Cell::num(cfg.lo), Cell::num(cfg.hi), Cell::num(m), Cell::str(ld(s.modulus())),
                      Cell::str(ld(s.error)), Cell::str(ld(bound)),
                      Cell::flag(s.modulus() + s.error <= bound)});
  }
  return t;
}

Table run_exceptional(const RunConfig& cfg) {
  const auto members = exceptional_members(cfg.x, cfg.workers);
  std::string joined;
  for (std::uint64_t n : members) {
    if (!joined.empty()) joined += ' ';
    joined += std::to_string(n);
  }
  return {{"x", "count", "members"},
          {{Cell::num(cfg.x), Cell::num(static_cast<unsigned long long>(members.size())),
            Cell::str(joined)}}};
}

Table run_nearhalf(const RunConfig& cfg) {
  const NearHalfCount c = near_half_count(cfg.x, cfg.bits, cfg.workers);
  const long double window = std::pow(static_cast<long double>(cfg.x), -0.75L);
  return {{"x", "bits", "window", "count", "borderline"},
          {{Cell::num(c.x), Cell::num(c.bits), Cell::str(ld(window)), Cell::num(c.count),
            Cell::num(c.borderline)}}};
}

Table run_histogram(const RunConfig& cfg) {
  const Histogram h = half_distance_histogram(cfg.x, cfg.bins, cfg.bits, cfg.workers);
  const long double total = static_cast<long double>(h.total());
  const long double width = 0.5L / h.bins;
  Table t{{"bin", "lower_edge", "upper_edge", "count", "frequency", "flagged"}, {}};
  for (unsigned b = 1; b <= h.bins; ++b) {
    const std::uint64_t c = h.counts[b - 1];
    t.rows.push_back({Cell::num(b), Cell::str(ld(width * (b - 1))), Cell::str(ld(width * b)),
                      Cell::num(c), Cell::str(ld(total > 0 ? c / total : 0)),
                      Cell::num(h.flagged)});
  }
  return t;
}

std::string joined(const std::vector<Monomial>& ms) {
  std::string s;
  for (const auto& m : ms) {
    if (!s.empty()) s += ';';
    s += m.to_string();
  }
  return s;
}

Row solution_row(const std::string& step, const ExponentSolution& sol) {
  const bool ordered = sol.active.has_value();
  const auto exp_of = [&](const Monomial& m) { return to_string(m.exponent(sol.asymptotic)); };
  return {Cell::str(step),
          Cell::str(sol.variable),
          Cell::str(ordered ? sol.argmin().to_string() : ""),
          Cell::str(ordered ? exp_of(sol.argmin()) : ""),
          Cell::str(ordered ? sol.value().to_string() : ""),
          Cell::str(ordered ? exp_of(sol.value()) : ""),
          Cell::str(joined(sol.crossings)),
          Cell::str(joined(sol.values))};
}

// "F=x:5/2,K:-1/2;G=x:19/8,K:1/4;G=..." into F and the Gs.
std::pair<Monomial, std::vector<Monomial>> parse_problem(const std::string& spec) {
  std::optional<Monomial> F;
  std::vector<Monomial> Gs;
  std::stringstream in(spec);
  std::string part;
  while (std::getline(in, part, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    const std::string tag = eq == std::string::npos ? "" : part.substr(0, eq);
    if (tag == "F") {
      if (F) throw ConfigError("--exponent names F more than once");
      F = Monomial::parse(part.substr(eq + 1));
    } else if (tag == "G") {
      Gs.push_back(Monomial::parse(part.substr(eq + 1)));
    } else {
      throw ConfigError("--exponent term '" + part + "' must start with F= or G=");
    }
  }
  if (!F) throw ConfigError("--exponent needs an F= term");
  if (Gs.empty()) throw ConfigError("--exponent needs at least one G= term");
  return {*F, Gs};
}

Table run_optimize(const RunConfig& cfg) {
  Table t{{"step", "variable", "argmin", "argmin_exponent", "value", "value_exponent",
           "crossings", "values"},
          {}};
  if (cfg.chain) {
    Rational k;
    try {
      k = parse_rational_sum(cfg.chain_k);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--k: ") + e.what());
    }
    const MomentErrorChain c = moment_error_chain(k);
    t.rows.push_back(solution_row("1", c.eliminate_m));
    t.rows.push_back(solution_row("2", c.eliminate_l));
    t.rows.push_back(solution_row("3", c.eliminate_k));
    return t;
  }
  const auto [F, Gs] = parse_problem(cfg.exponent_spec);
  t.rows.push_back(solution_row("1", solve_exponents(F, Gs, cfg.variable, cfg.asymptotic)));
  return t;
}

Table run_fit(const RunConfig& cfg) {
  const FitReport f = fit_residual(cfg.xs, cfg.k, reduction(cfg));
  return {{"k", "points", "slope", "intercept"},
          {{Cell::num(cfg.k), Cell::num(static_cast<unsigned long long>(f.xs.size())),
            Cell::str(ld(f.slope)), Cell::str(ld(f.intercept))}}};
}

Table compute(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Moments: return run_moments(cfg);
    case Command::Average: return run_average(cfg);
    case Command::Sandwich: return run_sandwich(cfg);
    case Command::Discrepancy: return run_discrepancy(cfg);
    case Command::Weyl: return run_weyl(cfg);
    case Command::KnBound: return run_knbound(cfg);
    case Command::Exceptional: return run_exceptional(cfg);
    case Command::NearHalf: return run_nearhalf(cfg);
    case Command::Histogram: return run_histogram(cfg);
    case Command::Optimize: return run_optimize(cfg);
    case Command::Fit: return run_fit(cfg);
    case Command::Terms: break;
  }
  throw std::logic_error("unhandled command");
}

bool checkpointable(Command c) {
  return c == Command::Moments || c == Command::Average || c == Command::Sandwich;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::string name = to_string(cfg.command);
  try {
    if (cfg.checkpoint && !checkpointable(cfg.command)) {
      throw ConfigError("--checkpoint is only supported by moments, average and sandwich");
    }
    if (cfg.command == Command::Terms) {
      if (!cfg.out) {
        run_terms(cfg, out);
        return kExitOk;
      }
      std::ofstream file(*cfg.out, std::ios::binary | std::ios::trunc);
      if (!file) throw IoError("cannot open " + cfg.out->string() + " for writing");
      run_terms(cfg, file);
      file.flush();
      if (!file) throw IoError("failed writing " + cfg.out->string());
      return kExitOk;
    }
    const Table t = compute(cfg);
    if (cfg.out) {
      emit_to_path(*cfg.out, cfg.format, t.columns, t.rows);
    } else {
      emit(out, cfg.format, t.columns, t.rows);
    }
    return kExitOk;
  } catch (const Halted& h) {
    err << "cannonball " << name << ": halted after n = " << h.last_n << "\n";
    return kExitHalted;
  } catch (const CheckpointError& e) {
    err << "cannonball " << name << ": " << e.what() << "\n";
    return kExitCheckpoint;
  } catch (const IoError& e) {
    err << "cannonball " << name << ": " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    // ConfigError, InvalidProblemError and malformed exponent lists.
    err << "cannonball " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "cannonball " << name << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto parsed = parse_args(argc, argv, out, err);
  if (const int* code = std::get_if<int>(&parsed)) return *code;
  return run(std::get<RunConfig>(parsed), out, err);
}

}  // namespace cannonball::cli
