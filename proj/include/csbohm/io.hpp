#ifndef CSBOHM_IO_HPP
#define CSBOHM_IO_HPP

#include <filesystem>
#include <string>

#include "csbohm/guidance.hpp"
#include "csbohm/propagator.hpp"
#include "csbohm/trajectory.hpp"

namespace csbohm {

// Tabular exports. All CSV uses '\n' endings, a single header row, and
// shortest round-trip formatting for doubles, so repeated runs produce
// byte-identical files.

/// Columns: x, density, current, velocity, defined. Velocity is empty in
/// cells where the field is undefined.
std::string guidance_csv(const GuidanceField& field);

/// Columns: lambda, t, x, tau, character, turning. Character labels the
/// segment ending at the row's point ("timelike"/"spacelike", empty for the
/// first row); turning is 1 on rows recorded as turning points.
std::string worldline_csv(const WorldLine& line);

/// Columns: x, value.
std::string density_csv(const Grid1D& grid, const RVec& values);

/// Record round-trip: grid, snapshot times, and interleaved re/im samples.
std::string record_json(const EvolutionRecord& rec);
EvolutionRecord record_from_json(const std::string& text);

/// Creates parent directories as needed; ConfigError when the file cannot
/// be written or read.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double ("1.5", "1e30");
/// nan/inf spelled out.
std::string format_double(double value);

} // namespace csbohm

#endif
