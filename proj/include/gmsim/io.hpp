#pragma once

/**
 * \file io.hpp
 *
 * File formats: JSON scenario documents, CSV traces with an event-log and a
 * metadata sidecar, JSON reports and SVG plots. Every file is written to a
 * temporary sibling first and renamed into place.
 */

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gmsim/analysis.hpp"
#include "gmsim/scenarios.hpp"
#include "gmsim/trace.hpp"

namespace gmsim {

// ---- scenarios -------------------------------------------------------------

/// Parses and validates a scenario document. Throws SyntaxError (with line
/// and column), UnknownKeyError, InvariantViolation or LengthMismatchError;
/// the last three name the offending field as a dotted path.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

std::string serialize_scenario(const Scenario& sc);
void save_scenario(const Scenario& sc, const std::filesystem::path& path);

// ---- traces ----------------------------------------------------------------

/// `<trace>.events.csv`: time, element (1-based), from, to, guard_value, bracket.
std::filesystem::path events_path(const std::filesystem::path& trace_path);
/// `<trace>.meta.json`: loop kind, element count and run metadata.
std::filesystem::path metadata_path(const std::filesystem::path& trace_path);

/// Writes the CSV plus both sidecars. Refuses traces with fewer than 2 rows.
void write_trace(const Trace& trace, const std::filesystem::path& path);

/// Throws TraceFormatError on a malformed file or a header that does not
/// fit the trace schema.
Trace read_trace(const std::filesystem::path& path);

std::string format_double(double v);  ///< %.17g

// ---- reports ---------------------------------------------------------------

std::string report_json(const DriftReport& r);
std::string report_json(const BreakawayReport& r);
std::string report_json(const AsymmetryReport& r);
std::string report_json(const ResidualReport& r, const std::vector<Event>& events_a,
                        const std::vector<Event>& events_b);

void write_text_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text(const std::filesystem::path& path);

// ---- plots -----------------------------------------------------------------

struct PlotSpec {
  std::string x = "t";
  std::vector<std::string> y;
  std::string title;
};

/// Standalone SVG: frame, ticks, axis labels, a legend and one polyline per
/// y column. Throws UnknownColumnError for a missing column.
std::string render_svg(const Trace& trace, const PlotSpec& spec);
void emit_plot(const Trace& trace, const PlotSpec& spec, const std::filesystem::path& out);

}  // namespace gmsim
