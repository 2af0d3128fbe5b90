#include "markov_rank/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "markov_rank/io.hpp"
#include "markov_rank/mc_oracle.hpp"
#include "markov_rank/serialize.hpp"
#include "markov_rank/sink_analysis.hpp"
#include "markov_rank/source_analysis.hpp"
#include "markov_rank/spectral.hpp"

#ifndef MARKOV_RANK_VERSION
#define MARKOV_RANK_VERSION "0.0.0"
#endif

namespace markov_rank::cli {
namespace {

using nlohmann::json;

struct Globals {
  std::string input;
  std::string format;
  std::string out_path;
  bool json = false;
  bool timestamp = false;
};

struct Options {
  double tol = 1e-12;
  double eigen_tol = 1e-8;
  double rank_tol = 1e-9;
  long max_iter = 100000;
  std::string hole = "1";
  std::string init = "uniform";
  std::string fast;
  std::string slow;
  std::string init_fast = "uniform";
  std::string init_slow = "uniform";
  std::string curves_path;
  std::string start;
  std::string norm = "l1";
  std::string steps;
  long trials = 100000;
  std::uint64_t seed = 0;
  long horizon = 500;
  int threads = 0;
};

/// Result of one subcommand: the text to emit and the exit code.
struct Outcome {
  std::string text;
  int code = kOk;
};

class Runner {
 public:
  Runner(const Globals& g, const Options& o, std::ostream& err) : g_(g), o_(o), err_(err) {}

  Outcome run(const std::string& command) {
    matrix_.emplace(load_matrix_file(g_.input, format()));
    if (command == "validate") return validate();
    if (command == "sinks") return sinks();
    if (command == "sources") return sources();
    if (command == "survival") return survival();
    if (command == "qsd") return qsd();
    if (command == "crossing") return crossing();
    if (command == "tv") return tv();
    if (command == "simulate") return simulate();
    throw ParseError("unknown command '" + command + "'");
  }

 private:
  InputFormat format() const {
    if (g_.format.empty()) return format_from_path(g_.input);
    return g_.format == "csv" ? InputFormat::Csv : InputFormat::Json;
  }

  const TransitionMatrixd& p() const { return *matrix_; }
  PerronOptions perron_opts() const { return {o_.tol, o_.max_iter}; }

  json manifest(const std::string& command, json parameters, json tolerances,
                std::optional<std::uint64_t> seed = std::nullopt) const {
    json m = {{"command", command},
              {"input", g_.input},
              {"parameters", std::move(parameters)},
              {"tool_version", MARKOV_RANK_VERSION},
              {"tolerances", std::move(tolerances)}};
    if (seed) m["seed"] = *seed;
    if (g_.timestamp) {
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      std::ostringstream ts;
      ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
      m["timestamp"] = ts.str();
    }
    return m;
  }

  static std::string csv_with_manifest(const json& m, const std::string& body) {
    return "# manifest " + dump_json_line(m) + "\n" + body;
  }

  Outcome validate() {
    const auto report = analyze_structure(p());
    std::ostringstream text;
    json result = {{"states", p().size()},
                   {"kind", to_string(p().kind())},
                   {"structure", to_json(report)}};
    int code = kOk;
    std::string summary;
    if (!report.irreducible) {
      summary = "reducible (" + std::to_string(report.components.size()) + " components)";
      code = kStructure;
    } else {
      summary = std::string("irreducible, ") +
                (report.aperiodic() ? "aperiodic" : "periodic");
      json holes = json::array();
      long irreducible_holes = 0;
      std::ostringstream table;
      table << "hole  irreducible  period  leaking_rows\n";
      for (Index k = 0; k < p().size(); ++k) {
        const auto q = remove_states(p(), Hole::single(k, p().size()));
        const auto qr = analyze_structure(q);
        irreducible_holes += qr.irreducible ? 1 : 0;
        holes.push_back({{"hole", k + 1},
                         {"irreducible", qr.irreducible},
                         {"period", qr.period},
                         {"leaking_rows", q.deficient_rows().size()}});
        table << std::left << std::setw(6) << k + 1 << std::setw(13)
              << (qr.irreducible ? "yes" : "no") << std::setw(8) << qr.period
              << q.deficient_rows().size() << "\n";
      }
      result["punched"] = holes;
      if (irreducible_holes == p().size()) {
        summary += "; all " + std::to_string(p().size()) + " punched matrices irreducible";
      } else {
        summary += "; " + std::to_string(p().size() - irreducible_holes) + " of " +
                   std::to_string(p().size()) + " punched matrices reducible";
      }
      if (!report.aperiodic() && g_.json) {
        err_ << "warning: period " << report.period << "\n";
      }
      text << table.str();
    }
    result["summary"] = summary;
    if (g_.json) {
      result["manifest"] = manifest("validate", json::object(), {{"row_sum", kStochasticTol}});
      return {dump_json(result), code};
    }
    std::ostringstream head;
    head << "matrix: " << p().size() << " states, " << to_string(p().kind()) << "\n"
         << summary << "\n";
    if (!report.aperiodic()) head << "warning: period " << report.period << "\n";
    return {head.str() + text.str(), code};
  }

  Outcome sinks() {
    const auto ranking = rank_sinks(p(), o_.rank_tol, perron_opts());
    std::optional<RowVector<double>> pi;
    if (p().is_stochastic()) pi = stationary(p()).pi.weights();

    // Pairs where a faster sink carries less stationary mass than a slower one.
    json notes = json::array();
    if (pi) {
      std::vector<std::size_t> group_of(static_cast<std::size_t>(p().size()));
      for (std::size_t g = 0; g < ranking.ties.size(); ++g) {
        for (Index s : ranking.ties[g]) group_of[static_cast<std::size_t>(s)] = g;
      }
      for (std::size_t a = 0; a < ranking.sigma.size(); ++a) {
        for (std::size_t b = a + 1; b < ranking.sigma.size(); ++b) {
          const Index fast = ranking.sigma[a], slow = ranking.sigma[b];
          if (group_of[static_cast<std::size_t>(fast)] == group_of[static_cast<std::size_t>(slow)]) {
            continue;
          }
          if ((*pi)(fast) < (*pi)(slow) - o_.rank_tol) {
            std::ostringstream note;
            note << "state " << fast + 1 << " escapes faster than state " << slow + 1
                 << " although pi_" << slow + 1 << " > pi_" << fast + 1;
            notes.push_back(note.str());
          }
        }
      }
    }

    json result = to_json(ranking);
    result["notes"] = notes;
    if (pi) {
      json arr = json::array();
      for (Index i = 0; i < pi->size(); ++i) arr.push_back((*pi)(i));
      result["stationary"] = arr;
    }
    if (g_.json) {
      result["manifest"] = manifest("sinks", json::object(),
                                    {{"tol", o_.tol}, {"rank_tol", o_.rank_tol},
                                     {"max_iter", o_.max_iter}});
      return {dump_json(result), kOk};
    }
    std::ostringstream text;
    text << "rank  state  mu                   lambda               pi\n";
    for (std::size_t r = 0; r < ranking.sigma.size(); ++r) {
      const auto& rec = ranking.records[static_cast<std::size_t>(ranking.sigma[r])];
      text << std::left << std::setw(6) << r + 1 << std::setw(7) << rec.state + 1 << std::setw(21)
           << format_double(rec.mu) << std::setw(21) << format_double(rec.lambda)
           << (pi ? format_double((*pi)(rec.state)) : std::string("-")) << "\n";
    }
    text << "order:";
    for (std::size_t g = 0; g < ranking.ties.size(); ++g) {
      text << (g ? " >" : "") << " ";
      const auto& tie = ranking.ties[g];
      if (tie.size() > 1) text << "{";
      for (std::size_t i = 0; i < tie.size(); ++i) text << (i ? "," : "") << tie[i] + 1;
      if (tie.size() > 1) text << "}";
    }
    text << "\n";
    for (const auto& t : ranking.ties) {
      if (t.size() > 1) {
        text << "tie:";
        for (Index s : t) text << " " << s + 1;
        text << " (escape rates within " << format_double(o_.rank_tol) << ")\n";
      }
    }
    for (Index s : ranking.warnings) {
      text << "warning: punched matrix for state " << s + 1 << " is reducible\n";
    }
    for (const auto& n : notes) text << "note: " << n.get<std::string>() << "\n";
    return {text.str(), kOk};
  }

  Outcome sources() {
    EigenOptions eo;
    eo.tol = o_.eigen_tol;
    const auto es = eigen_structure(p(), eo);
    const auto ranking = rank_sources(es);
    json result = to_json(ranking);
    result["eigen_structure"] = to_json(es);
    const int code = ranking.degenerate ? kDegenerate : kOk;
    if (ranking.degenerate) {
      err_ << "degenerate: the dominant projection image has dimension "
           << ranking.image_dimension << "; no strict source order exists\n";
    }
    if (es.ill_conditioned) err_ << "warning: canonical basis is ill-conditioned\n";
    if (g_.json) {
      result["manifest"] = manifest("sources", json::object(),
                                    {{"eigen_tol", eo.tol}, {"cluster_tol", eo.cluster_tol},
                                     {"cond_limit", eo.cond_limit}});
      return {dump_json(result), code};
    }
    std::ostringstream text;
    text << "eigenvalues:";
    for (const auto& l : es.eigenvalues) {
      text << " " << format_double(l.real());
      if (l.imag() != 0) text << "+" << format_double(l.imag()) << "i";
    }
    text << "\ncondition: " << format_double(es.condition) << "\n";
    if (ranking.key) {
      text << "dominant key: mu=" << format_double(ranking.key->mu) << " r=" << ranking.key->r
           << " (image dimension " << ranking.image_dimension << ")\n";
    }
    text << "state  q\n";
    for (std::size_t i = 0; i < ranking.q.size(); ++i) {
      text << std::left << std::setw(7) << i + 1 << format_double(ranking.q[i]) << "\n";
    }
    if (ranking.degenerate) {
      text << "degenerate: no strict source order\n";
    } else {
      text << "order:";
      for (Index s : ranking.sigma) text << " " << s + 1;
      text << "\n";
    }
    return {text.str(), code};
  }

  Outcome survival() {
    const Hole hole = parse_hole(o_.hole, p().size());
    const auto init = parse_init(o_.init, p().size());
    const long n_max = o_.steps.empty() ? 50 : std::stol(o_.steps);
    const auto curve = survival_curve(p(), hole, init, n_max);
    std::optional<Enveloped> env;
    try {
      env = envelope(p(), hole, init, perron_opts());
    } catch (const ReducibleAfterRemoval& e) {
      err_ << "warning: " << e.what() << "; envelope columns left empty\n";
    }
    std::ostringstream body;
    write_survival_csv(body, curve, env);
    const json m = manifest("survival",
                            {{"hole", to_json(hole)}, {"init", o_.init}, {"steps", n_max}},
                            {{"tol", o_.tol}, {"underflow_floor", kUnderflowFloor}});
    return {csv_with_manifest(m, body.str()), kOk};
  }

  Outcome qsd() {
    const Hole hole = parse_hole(o_.hole, p().size());
    const auto rate = escape_rate(p(), hole, perron_opts());
    if (rate.reducible_after_removal) {
      err_ << "warning: punched matrix is reducible; the escape rate may depend on the "
              "initial distribution\n";
    }
    json result = to_json(rate);
    result["manifest"] = manifest("qsd", {{"hole", to_json(hole)}},
                                  {{"tol", o_.tol}, {"max_iter", o_.max_iter}});
    return {dump_json(result), kOk};
  }

  Outcome crossing() {
    if (o_.fast.empty() || o_.slow.empty()) throw ParseError("crossing needs --fast and --slow");
    const Hole fast = parse_hole(o_.fast, p().size());
    const Hole slow = parse_hole(o_.slow, p().size());
    const auto init_fast = parse_init(o_.init_fast, p().size());
    const auto init_slow = parse_init(o_.init_slow, p().size());
    const auto cert = crossing_time(p(), fast, slow, init_fast, init_slow, o_.rank_tol, perron_opts());
    if (!o_.curves_path.empty()) {
      std::ofstream csv(o_.curves_path);
      if (!csv) throw ParseError("cannot write '" + o_.curves_path + "'");
      write_crossing_csv(csv, cert);
    }
    json result = to_json(cert);
    result["manifest"] =
        manifest("crossing",
                 {{"fast", to_json(fast)}, {"slow", to_json(slow)},
                  {"init_fast", o_.init_fast}, {"init_slow", o_.init_slow}},
                 {{"tol", o_.tol}, {"rank_tol", o_.rank_tol}, {"underflow_floor", kUnderflowFloor}});
    return {dump_json(result), kOk};
  }

  Outcome tv() {
    if (o_.start.empty()) throw ParseError("tv needs --start");
    const auto start = parse_init(o_.start, p().size());
    Norm norm;
    if (o_.norm == "l1") norm = Norm::L1;
    else if (o_.norm == "l2") norm = Norm::L2;
    else if (o_.norm == "linf") norm = Norm::Linf;
    else throw ParseError("unknown norm '" + o_.norm + "' (expected l1, l2 or linf)");
    const long n_max = o_.steps.empty() ? 50 : std::stol(o_.steps);
    const auto curve = tv_curve(p(), start, norm, n_max);
    std::ostringstream body;
    write_tv_csv(body, curve);
    const json m = manifest("tv", {{"start", o_.start}, {"norm", o_.norm}, {"steps", n_max}},
                            {{"tol", o_.tol}});
    return {csv_with_manifest(m, body.str()), kOk};
  }

  Outcome simulate() {
    const Hole hole = parse_hole(o_.hole, p().size());
    const auto init = parse_init(o_.init, p().size());
    std::vector<long> ns;
    if (o_.steps.find(',') != std::string::npos) {
      for (double x : parse_entry_list(o_.steps)) ns.push_back(static_cast<long>(x));
    } else {
      const long n_max = o_.steps.empty() ? 10 : std::stol(o_.steps);
      for (long n = 0; n <= n_max; ++n) ns.push_back(n);
    }
    SimConfig cfg{o_.trials, o_.seed, o_.horizon, o_.threads};
    const auto estimates = estimate_survival(p(), init, hole, ns, cfg);
    json result;
    json arr = json::array();
    for (const auto& e : estimates) arr.push_back(to_json(e));
    result["estimates"] = arr;

    // Exact survival mass at the same steps for side-by-side comparison.
    try {
      const long n_max = *std::max_element(ns.begin(), ns.end());
      const auto curve = survival_curve(p(), hole, init, n_max);
      json exact = json::array();
      for (long n : ns) {
        const auto i = static_cast<std::size_t>(n);
        exact.push_back(i < curve.values.size() ? curve.values[i] : 0.0);
      }
      result["exact"] = exact;
    } catch (const Error& e) {
      result["exact"] = nullptr;
    }
    result["manifest"] = manifest(
        "simulate",
        {{"hole", to_json(hole)}, {"init", o_.init}, {"steps", ns}, {"trials", o_.trials},
         {"horizon", o_.horizon}},
        {{"ci_level", 0.95}, {"variance_floor", "1/trials"}}, o_.seed);
    return {dump_json(result), kOk};
  }

  const Globals& g_;
  const Options& o_;
  std::ostream& err_;
  std::optional<TransitionMatrixd> matrix_;
};

std::vector<double> read_vector_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON vector: ") + e.what());
    }
    std::vector<double> out;
    for (const auto& e : doc) {
      if (e.is_number()) out.push_back(e.get<double>());
      else if (e.is_string()) out.push_back(parse_entry(e.get<std::string>()));
      else throw ParseError("vector entries must be numbers or \"a/b\" strings");
    }
    return out;
  }
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ',';
  }
  while (!text.empty() && (text.back() == ',' || text.back() == ' ')) text.pop_back();
  return parse_entry_list(text);
}

}  // namespace

Distributiond parse_init(const std::string& spec, Index n) {
  if (spec == "uniform") return Distributiond::uniform(n);
  if (spec.starts_with("e:")) {
    const long k = std::stol(spec.substr(2));
    if (k < 1 || k > n) throw ValidationError("state " + spec.substr(2) + " out of range");
    return Distributiond::point(n, k - 1);
  }
  const std::vector<double> w =
      spec.starts_with("file:") ? read_vector_file(spec.substr(5)) : parse_entry_list(spec);
  if (static_cast<Index>(w.size()) != n) {
    throw ValidationError("initial vector has " + std::to_string(w.size()) + " entries, expected " +
                          std::to_string(n));
  }
  RowVector<double> v(n);
  for (Index i = 0; i < n; ++i) v(i) = w[static_cast<std::size_t>(i)];
  return Distributiond(std::move(v));
}

Hole parse_hole(const std::string& spec, Index n) {
  std::vector<Index> states;
  for (double x : parse_entry_list(spec)) {
    if (x != std::floor(x)) throw ParseError("hole states must be integers");
    states.push_back(static_cast<Index>(x) - 1);
  }
  return Hole(std::move(states), n);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Globals g;
  Options o;
  CLI::App app{"Rank the states of a finite Markov chain as sinks and as sources."};
  app.name("markov-rank");
  app.set_version_flag("--version", MARKOV_RANK_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--input,-i", g.input, "Transition matrix file")->required();
  app.add_option("--format", g.format, "Input format (default: from extension)")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out,-o", g.out_path, "Write the report here instead of stdout");
  app.add_flag("--json", g.json, "Machine-readable JSON report");
  app.add_flag("--timestamp", g.timestamp, "Record the wall-clock time in the manifest");

  const auto add_tol = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "Perron residual tolerance")->capture_default_str();
    sub->add_option("--max-iter", o.max_iter, "Power iteration limit")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check stochasticity, irreducibility and period");
  auto* sinks = app.add_subcommand("sinks", "Rank states by escape rate through a hole at the state");
  add_tol(sinks);
  sinks->add_option("--rank-tol", o.rank_tol, "Escape rates closer than this tie")->capture_default_str();
  auto* sources = app.add_subcommand("sources", "Rank states by speed of convergence to stationarity");
  sources->add_option("--tol", o.eigen_tol, "Rank and zero-projection tolerance")->capture_default_str();
  auto* survival = app.add_subcommand("survival", "Survival mass curve through a hole (CSV)");
  add_tol(survival);
  survival->add_option("--hole", o.hole, "Hole states, 1-based, comma-separated")->required();
  survival->add_option("--init", o.init, "uniform | e:k | file:PATH | v1,v2,...")->capture_default_str();
  survival->add_option("--steps", o.steps, "Last step n_max")->default_str("50");
  auto* qsd = app.add_subcommand("qsd", "Escape rate and quasi-stationary distribution (JSON)");
  add_tol(qsd);
  qsd->add_option("--hole", o.hole, "Hole states, 1-based, comma-separated")->required();
  auto* crossing = app.add_subcommand("crossing", "Certified tail-crossing time (JSON)");
  add_tol(crossing);
  crossing->add_option("--fast", o.fast, "Faster hole")->required();
  crossing->add_option("--slow", o.slow, "Slower hole")->required();
  crossing->add_option("--init-fast", o.init_fast, "Initial distribution for the fast hole")
      ->capture_default_str();
  crossing->add_option("--init-slow", o.init_slow, "Initial distribution for the slow hole")
      ->capture_default_str();
  crossing->add_option("--rank-tol", o.rank_tol, "Minimum escape-rate gap")->capture_default_str();
  crossing->add_option("--curves", o.curves_path, "Also write both curves as CSV");
  auto* tv = app.add_subcommand("tv", "Distance to stationarity curve (CSV)");
  tv->add_option("--start", o.start, "uniform | e:k | file:PATH | v1,v2,...")->required();
  tv->add_option("--norm", o.norm, "l1 | l2 | linf")->capture_default_str();
  tv->add_option("--steps", o.steps, "Last step n_max")->default_str("50");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo survival estimates (JSON)");
  simulate->add_option("--hole", o.hole, "Hole states, 1-based, comma-separated")->required();
  simulate->add_option("--init", o.init, "uniform | e:k | file:PATH | v1,v2,...")->capture_default_str();
  simulate->add_option("--steps", o.steps, "Steps: a list n1,n2,... or a last step n_max")
      ->default_str("10");
  simulate->add_option("--trials", o.trials, "Number of trajectories")->capture_default_str();
  simulate->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--horizon", o.horizon, "Maximum steps per trajectory")->capture_default_str();
  simulate->add_option("--threads", o.threads,
                       "Worker threads (default: MARKOV_RANK_THREADS or all cores)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << MARKOV_RANK_VERSION << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kParse;
  }

  std::string command;
  for (auto* sub : {validate, sinks, sources, survival, qsd, crossing, tv, simulate}) {
    if (sub->parsed()) command = sub->get_name();
  }

  try {
    Runner runner(g, o, err);
    const Outcome outcome = runner.run(command);
    if (g.out_path.empty()) {
      out << outcome.text;
    } else {
      std::ofstream file(g.out_path);
      if (!file) throw ParseError("cannot write '" + g.out_path + "'");
      file << outcome.text;
    }
    return outcome.code;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kParse;
  } catch (const NotIrreducible& e) {
    err << "structure: " << e.what() << "\n";
    return kStructure;
  } catch (const AperiodicityViolation& e) {
    err << "structure: " << e.what() << "\n";
    return kStructure;
  } catch (const ReducibleAfterRemoval& e) {
    err << "structure: " << e.what() << "\n";
    return kStructure;
  } catch (const DegenerateInit& e) {
    err << "degenerate: " << e.what() << "\n";
    return kDegenerate;
  } catch (const RatesNotSeparated& e) {
    err << "degenerate: " << e.what() << "\n";
    return kDegenerate;
  } catch (const HorizonTooSmall& e) {
    err << "degenerate: " << e.what() << "\n";
    return kDegenerate;
  } catch (const ConvergenceFailure& e) {
    err << "convergence: " << e.what() << " (best residual " << format_double(e.best_residual())
        << ")\n";
    return kConvergence;
  } catch (const std::invalid_argument& e) {
    err << "parse error: bad number in arguments\n";
    return kParse;
  }
}

}  // namespace markov_rank::cli
