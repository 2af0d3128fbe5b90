#include "markov_rank/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace markov_rank {
namespace {

using nlohmann::json;

// indent < 0 writes everything on one line.
void dump(std::ostream& out, const json& v, int indent) {
  const bool line = indent < 0;
  const std::string pad(line ? 0 : static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(line ? 0 : static_cast<std::size_t>(indent), ' ');
  const int inner = line ? indent : indent + 2;
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << (line ? "{" : "{\n");
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << (line ? ", " : ",\n");
        first = false;
        out << pad << json(it.key()).dump() << ": ";
        dump(out, it.value(), inner);
      }
      if (!line) out << "\n" << close;
      out << "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat =
          line || std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_primitive(); });
      out << (flat ? "[" : "[\n");
      bool first = true;
      for (const auto& e : v) {
        if (!first) out << (flat ? ", " : ",\n");
        first = false;
        if (!flat) out << pad;
        dump(out, e, inner);
      }
      if (!flat) out << "\n" << close;
      out << "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = v.get<double>();
      if (std::isfinite(x)) {
        out << format_double(x);
      } else {
        out << '"' << format_double(x) << '"';
      }
      return;
    }
    default:
      out << v.dump();
  }
}

json states_json(const std::vector<Index>& states) {
  json arr = json::array();
  for (Index s : states) arr.push_back(s + 1);
  return arr;
}

template <typename Vec>
json vector_json(const Vec& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(static_cast<double>(v(i)));
  return arr;
}

json curve_json(const std::vector<double>& values) {
  json arr = json::array();
  for (double x : values) arr.push_back(x);
  return arr;
}

std::string cell(const std::vector<double>& values, long n) {
  const auto i = static_cast<std::size_t>(n);
  return i < values.size() ? format_double(values[i]) : std::string();
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const json& value) {
  std::ostringstream out;
  dump(out, value, 0);
  out << "\n";
  return out.str();
}

std::string dump_json_line(const json& value) {
  std::ostringstream out;
  dump(out, value, -1);
  return out.str();
}

json to_json(const StructureReport& report) {
  json comps = json::array();
  for (const auto& c : report.components) comps.push_back(states_json(c));
  return {{"irreducible", report.irreducible},
          {"period", report.period},
          {"components", comps},
          {"component_periods", report.component_periods}};
}

json to_json(const Hole& hole) { return states_json(hole.states()); }

json to_json(const EscapeRated& rate) {
  json out = {{"hole", to_json(rate.hole)},
              {"mu", static_cast<double>(rate.mu)},
              {"lambda", static_cast<double>(rate.lambda)},
              {"survivors", states_json(rate.survivors)},
              {"qsd", vector_json(rate.qsd)},
              {"residual", static_cast<double>(rate.perron.residual)},
              {"eigenvectors_defined", rate.perron.eigenvectors_defined},
              {"reducible_after_removal", rate.reducible_after_removal}};
  return out;
}

json to_json(const SinkRankingd& ranking) {
  json records = json::array();
  for (const auto& r : ranking.records) {
    records.push_back({{"state", r.state + 1},
                       {"mu", r.mu},
                       {"lambda", r.lambda},
                       {"reducible_after_removal", r.reducible_after_removal}});
  }
  json ties = json::array();
  for (const auto& t : ranking.ties) ties.push_back(states_json(t));
  return {{"records", records},
          {"sigma", states_json(ranking.sigma)},
          {"ties", ties},
          {"warnings", states_json(ranking.warnings)}};
}

json to_json(const Enveloped& env) {
  return {{"c1", env.c1}, {"c2", env.c2}, {"mu", env.mu}, {"lambda", env.lambda}};
}

json to_json(const CrossingCertificated& cert) {
  return {{"fast_hole", to_json(cert.fast_hole)},
          {"slow_hole", to_json(cert.slow_hole)},
          {"fast_init", vector_json(cert.fast_init.weights())},
          {"slow_init", vector_json(cert.slow_init.weights())},
          {"n0_empirical", cert.n0_empirical},
          {"n_star_certified", cert.n_star_certified},
          {"fast_envelope", to_json(cert.fast_envelope)},
          {"slow_envelope", to_json(cert.slow_envelope)},
          {"fast_curve", curve_json(cert.fast_curve.values)},
          {"slow_curve", curve_json(cert.slow_curve.values)}};
}

json to_json(const ProjectionKeyd& key) { return {{"mu", key.mu}, {"r", key.r}}; }

json to_json(const EigenStructured& es) {
  json basis = json::array();
  for (Index i = 0; i < es.size(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    basis.push_back({{"vector", vector_json(es.basis.row(i))},
                     {"eigenvalue", {es.eigenvalues[s].real(), es.eigenvalues[s].imag()}},
                     {"modulus", es.modulus[s]},
                     {"argument", es.argument[s]},
                     {"chain_index", es.chain_index[s]},
                     {"chain_id", es.chain_id[s]},
                     {"pair_link", es.pair_link[s] < 0 ? json(nullptr) : json(es.pair_link[s] + 1)}});
  }
  return {{"basis", basis},
          {"stationary", vector_json(es.pi)},
          {"condition", es.condition},
          {"min_cluster_gap", es.min_cluster_gap},
          {"ill_conditioned", es.ill_conditioned},
          {"jordan_fallback", es.jordan_fallback}};
}

json to_json(const SourceRankingd& ranking) {
  json q = json::array();
  for (double x : ranking.q) q.push_back(x);
  return {{"key", ranking.key ? to_json(*ranking.key) : json(nullptr)},
          {"q", q},
          {"sigma", states_json(ranking.sigma)},
          {"image_dimension", ranking.image_dimension},
          {"degenerate", ranking.degenerate}};
}

json to_json(const DominanceResultd& result) {
  return {{"verdict", to_string(result.verdict)},
          {"witness_key", result.witness_key ? to_json(*result.witness_key) : json(nullptr)},
          {"a", result.scalar_a ? json(*result.scalar_a) : json(nullptr)}};
}

json to_json(const SurvivalEstimate& est) {
  return {{"n", est.n},
          {"p_hat", est.p_hat},
          {"ci_half_width", est.ci_half_width},
          {"standard_error", est.standard_error()},
          {"trials", est.trials}};
}

json to_json(const TvEstimate& est) {
  return {{"n", est.n}, {"value", est.value}, {"trials", est.trials}, {"noise_floor", est.noise_floor}};
}

void write_survival_csv(std::ostream& out, const SurvivalCurved& curve,
                        const std::optional<Enveloped>& env) {
  out << "n,M,lower,upper\n";
  for (std::size_t n = 0; n < curve.values.size(); ++n) {
    const long k = static_cast<long>(n);
    out << n << ',' << format_double(curve.values[n]) << ',';
    if (env) out << format_double(env->lower(k)) << ',' << format_double(env->upper(k));
    else out << ',';
    out << '\n';
  }
}

void write_crossing_csv(std::ostream& out, const CrossingCertificated& cert) {
  out << "n,M_fast,M_slow,fast_lower,fast_upper,slow_lower,slow_upper\n";
  for (long n = 0; n <= cert.n_star_certified; ++n) {
    out << n << ',' << cell(cert.fast_curve.values, n) << ',' << cell(cert.slow_curve.values, n)
        << ',' << format_double(cert.fast_envelope.lower(n)) << ','
        << format_double(cert.fast_envelope.upper(n)) << ','
        << format_double(cert.slow_envelope.lower(n)) << ','
        << format_double(cert.slow_envelope.upper(n)) << '\n';
  }
}

void write_tv_csv(std::ostream& out, const TVCurved& curve) {
  out << "n,D\n";
  for (std::size_t n = 0; n < curve.values.size(); ++n) {
    out << n << ',' << format_double(curve.values[n]) << '\n';
  }
}

}  // namespace markov_rank
