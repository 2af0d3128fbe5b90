#pragma once

// Machine-readable output. JSON objects have sorted keys and floats carry 17
// significant digits; non-finite floats are written as the strings "inf",
// "-inf" and "nan". State indices are 1-based in every emitted artifact.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "markov_rank/chain_core.hpp"
#include "markov_rank/mc_oracle.hpp"
#include "markov_rank/sink_analysis.hpp"
#include "markov_rank/source_analysis.hpp"
#include "markov_rank/spectral.hpp"

namespace markov_rank {

/// %.17g, or "inf" / "-inf" / "nan".
std::string format_double(double x);

/// Stable pretty-printed JSON followed by a newline.
std::string dump_json(const nlohmann::json& value);

/// Same formatting rules on a single line, without trailing newline.
std::string dump_json_line(const nlohmann::json& value);

nlohmann::json to_json(const StructureReport& report);
nlohmann::json to_json(const Hole& hole);
nlohmann::json to_json(const EscapeRated& rate);
nlohmann::json to_json(const SinkRankingd& ranking);
nlohmann::json to_json(const Enveloped& env);
nlohmann::json to_json(const CrossingCertificated& cert);
nlohmann::json to_json(const ProjectionKeyd& key);
nlohmann::json to_json(const EigenStructured& es);
nlohmann::json to_json(const SourceRankingd& ranking);
nlohmann::json to_json(const DominanceResultd& result);
nlohmann::json to_json(const SurvivalEstimate& est);
nlohmann::json to_json(const TvEstimate& est);

/// Columns: n,M,lower,upper. Bounds are left empty without an envelope.
void write_survival_csv(std::ostream& out, const SurvivalCurved& curve,
                        const std::optional<Enveloped>& env);

/// Columns: n,M_fast,M_slow,fast_lower,fast_upper,slow_lower,slow_upper.
/// Missing (underflowed) curve values are left empty.
void write_crossing_csv(std::ostream& out, const CrossingCertificated& cert);

/// Columns: n,D.
void write_tv_csv(std::ostream& out, const TVCurved& curve);

}  // namespace markov_rank
