#include "cli/config.hpp"

#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

namespace cannonball::cli {

const char* to_string(Command c) {
  switch (c) {
    case Command::Terms: return "terms";
    case Command::Moments: return "moments";
    case Command::Average: return "average";
    case Command::Sandwich: return "sandwich";
    case Command::Discrepancy: return "discrepancy";
    case Command::Weyl: return "weyl";
    case Command::KnBound: return "knbound";
    case Command::Exceptional: return "exceptional";
    case Command::NearHalf: return "nearhalf";
    case Command::Histogram: return "histogram";
    case Command::Optimize: return "optimize";
    case Command::Fit: return "fit";
  }
  return "?";
}

std::string RunConfig::canonical() const {
  std::ostringstream s;
  s << "cmd=" << to_string(command) << ";range=" << lo << ":" << hi << ";x=" << x
    << ";k=" << k << ";L=" << L << ";K=";
  for (unsigned v : Ks) s << v << ",";
  s << ";bins=" << bins << ";m_max=" << m_max << ";bits=" << bits << ";xs=";
  for (auto v : xs) s << v << ",";
  s << ";exp=" << exponent_spec << ";var=" << variable << ";asym=" << asymptotic
    << ";chain=" << chain << ":" << chain_k;
  return s.str();
}

namespace {

struct RangeText {
  std::string text;
};

bool parse_range(const std::string& text, std::uint64_t& lo, std::uint64_t& hi) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return false;
  try {
    std::size_t used = 0;
    lo = std::stoull(text.substr(0, colon), &used);
    if (used != colon) return false;
    const std::string rest = text.substr(colon + 1);
    hi = std::stoull(rest, &used);
    return used == rest.size();
  } catch (const std::exception&) {
    return false;
  }
}

struct Usage {
  std::string message;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw Usage{message};
}

}  // namespace

std::variant<RunConfig, int> parse_args(int argc, const char* const* argv,
                                        std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string range;

  CLI::App app{"Exact computations on the distance from square pyramidal numbers "
               "to the nearest square."};
  app.name("cannonball");
  app.require_subcommand(1, 1);

  const std::map<std::string, Format> formats{{"csv", Format::Csv}, {"json", Format::Json}};
  std::map<std::string, CLI::Option*> format_opts;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--workers", cfg.workers, "Worker threads")
        ->envname("CANNONBALL_WORKERS");
    format_opts[sub->get_name()] =
        sub->add_option("--format", cfg.format, "Output format: csv or json")
            ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_option("--out", cfg.out, "Write output to this file instead of stdout");
    sub->add_option("--chunk", cfg.chunk, "Indices per work chunk");
  };
  auto checkpointing = [&](CLI::App* sub) {
    sub->add_option("--checkpoint", cfg.checkpoint,
                    "Checkpoint file (relative paths resolve under "
                    "$CANNONBALL_CHECKPOINT_DIR when set)");
    sub->add_option("--checkpoint-every", cfg.checkpoint_every,
                    "Indices between checkpoints");
    sub->add_option("--halt-after", cfg.halt_after,
                    "Stop after the first checkpoint at or beyond this index")
        ->group("");  // testing aid, hidden from help
  };

  std::map<std::string, Command> by_name;
  auto sub = [&](Command c, const std::string& help) {
    CLI::App* s = app.add_subcommand(to_string(c), help);
    by_name[to_string(c)] = c;
    common(s);
    return s;
  };

  auto* terms = sub(Command::Terms, "Emit n, P_n, floor sqrt, y_n, a_n and half side");
  terms->add_option("--range", range, "Index range lo:hi")->required();

  auto* moments = sub(Command::Moments, "Exact moment M_k(x) with main term and residual");
  moments->add_option("--x", cfg.x, "Upper index")->required();
  moments->add_option("--k", cfg.k, "Moment order (1..12)");
  checkpointing(moments);

  auto* average = sub(Command::Average, "Exact average A(x) = M_1(x)/x");
  average->add_option("--x", cfg.x, "Upper index")->required();
  checkpointing(average);

  auto* sandwich = sub(Command::Sandwich, "Certified lower/upper bracket of M_k(x)");
  sandwich->add_option("--x", cfg.x, "Upper index")->required();
  sandwich->add_option("--k", cfg.k, "Moment order (1..12)");
  sandwich->add_option("--L", cfg.L, "Even number of distance bins");
  sandwich->add_option("--bits", cfg.bits, "Fixed-point bits for sqrt(P_n)");
  checkpointing(sandwich);

  auto* discrepancy = sub(Command::Discrepancy,
                          "Star discrepancy of {sqrt P_n}, n <= x, with Erdos-Turan bounds");
  discrepancy->add_option("--x", cfg.x, "Number of points")->required();
  discrepancy->add_option("--K", cfg.Ks, "Truncations, comma separated")->delimiter(',');
  discrepancy->add_option("--bits", cfg.bits, "Fixed-point bits");

  auto* weyl = sub(Command::Weyl, "|S_m(N)|/N for m = 1..m_max");
  weyl->add_option("--x", cfg.x, "N")->required();
  weyl->add_option("--m-max", cfg.m_max, "Largest harmonic");
  weyl->add_option("--bits", cfg.bits, "Fixed-point bits");

  auto* kn = sub(Command::KnBound, "Exponential sums against the second-derivative bound");
  kn->add_option("--range", range, "Summation range lo:hi")->required();
  kn->add_option("--m-max", cfg.m_max, "Largest harmonic");
  kn->add_option("--bits", cfg.bits, "Fixed-point bits");

  auto* exceptional = sub(Command::Exceptional,
                          "Indices where the nearest square and nearest integer disagree");
  exceptional->add_option("--x", cfg.x, "Upper index")->required();

  auto* nearhalf = sub(Command::NearHalf, "Count of n <= x with |{sqrt P_n} - 1/2| <= x^(-3/4)");
  nearhalf->add_option("--x", cfg.x, "Upper index")->required();
  nearhalf->add_option("--bits", cfg.bits, "Fixed-point bits");

  auto* histogram = sub(Command::Histogram, "Histogram of |sqrt P_n - y_n| on [0, 1/2]");
  histogram->add_option("--x", cfg.x, "Upper index")->required();
  histogram->add_option("--bins", cfg.bins, "Number of bins");
  histogram->add_option("--bits", cfg.bits, "Fixed-point bits");

  auto* optimize = sub(Command::Optimize, "Balance monomial error terms in one variable");
  optimize->add_option("--exponent", cfg.exponent_spec,
                       "Terms as \"F=x:5/2,K:-1/2;G=x:19/8,K:1/4[;G=...]\"");
  optimize->add_option("--var", cfg.variable, "Variable to eliminate");
  optimize->add_option("--asymptotic", cfg.asymptotic, "Variable that orders crossings");
  optimize->add_flag("--chain", cfg.chain, "Run the M, L, K elimination for the moment error");
  optimize->add_option("--k", cfg.chain_k, "Moment order for --chain (rational)");

  auto* fit = sub(Command::Fit, "Log-log slope of |M_k(x) - main term|");
  fit->add_option("--xs", cfg.xs, "Abscissae, comma separated, increasing")
      ->delimiter(',')
      ->required();
  fit->add_option("--k", cfg.k, "Moment order (1..12)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  cfg.command = by_name.at(chosen->get_name());
  if (cfg.command == Command::Optimize && format_opts.at("optimize")->count() == 0) {
    cfg.format = Format::Json;
  }

  try {
    require(cfg.workers >= 1, "--workers must be at least 1");
    require(cfg.chunk >= 1, "--chunk must be at least 1");
    if (!range.empty()) {
      require(parse_range(range, cfg.lo, cfg.hi), "--range must look like lo:hi, got '" + range + "'");
      require(cfg.lo >= 1 && cfg.lo <= cfg.hi, "--range needs 1 <= lo <= hi");
    }
    if (cfg.command == Command::KnBound) {
      require(cfg.lo < cfg.hi, "--range needs lo < hi for knbound");
    }
    if (chosen->get_option_no_throw("--x") != nullptr) {
      require(cfg.x >= 1, "--x must be at least 1");
    }
    switch (cfg.command) {
      case Command::Moments:
      case Command::Sandwich:
      case Command::Fit:
        require(cfg.k >= 1 && cfg.k <= 12, "--k must be in [1, 12]");
        break;
      default:
        break;
    }
    if (cfg.command == Command::Sandwich) {
      require(cfg.L >= 2 && cfg.L % 2 == 0, "--L must be even and at least 2");
      require(cfg.bits >= 8, "--bits must be at least 8");
    } else if (chosen->get_option_no_throw("--bits") != nullptr) {
      require(cfg.bits >= 32 && cfg.bits <= 120, "--bits must be in [32, 120]");
    }
    if (cfg.command == Command::Histogram) require(cfg.bins >= 2, "--bins must be at least 2");
    if (cfg.command == Command::Weyl || cfg.command == Command::KnBound) {
      require(cfg.m_max >= 1, "--m-max must be at least 1");
    }
    if (cfg.command == Command::Discrepancy) {
      require(!cfg.Ks.empty(), "--K needs at least one value");
      for (unsigned K : cfg.Ks) require(K >= 1, "--K values must be at least 1");
    }
    if (cfg.command == Command::Optimize) {
      require(cfg.chain || !cfg.exponent_spec.empty(), "--exponent is required unless --chain is given");
    }
    if (cfg.checkpoint) {
      require(cfg.checkpoint_every >= 1, "--checkpoint-every must be at least 1");
      if (cfg.checkpoint->is_relative()) {
        if (const char* dir = std::getenv("CANNONBALL_CHECKPOINT_DIR"); dir && *dir) {
          cfg.checkpoint = std::filesystem::path(dir) / *cfg.checkpoint;
        }
      }
    }
  } catch (const Usage& u) {
    err << "cannonball " << chosen->get_name() << ": " << u.message << "\n";
    return kExitUsage;
  }
  return cfg;
}

}  // namespace cannonball::cli
