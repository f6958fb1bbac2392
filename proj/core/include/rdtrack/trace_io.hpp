#pragma once

#include <iosfwd>
#include <string>

#include "rdtrack/tracker.hpp"

namespace rdtrack {

/// Formats a double with 17 significant digits, enough for an exact
/// round-trip.
std::string format_double(double v);

/// Trace JSON: manifest (arbitrary JSON text, may be empty), library
/// version, the problem, per-point {beta, support, r_tilde, taylor_coeffs,
/// event} and the bifurcation records.  Deterministic: no wall-time fields.
void save_trace_json(std::ostream& os, const TrackTrace& trace,
                     const std::string& manifest_json = "");
TrackTrace load_trace_json(std::istream& is);

/// CSV projection: beta, r(x̂_1..x̂_M) embedded into the full alphabet,
/// expected distortion D, rate R (nats), min marginal over the support, and
/// the event tag.  A "# ..." first line carries the manifest.
void save_trace_csv(std::ostream& os, const TrackTrace& trace,
                    const std::string& manifest_json = "");

const char* to_string(GridEvent event);
const char* to_string(BifurcationKind kind);

}  // namespace rdtrack
