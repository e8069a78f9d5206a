#ifndef CSBOHM_SCENARIO_HPP
#define CSBOHM_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "csbohm/grid.hpp"

namespace csbohm {

// Canned experiments. Each run builds its own states and potential from a
// small set of knobs, checks a fixed list of named assertions, and returns
// everything needed to re-check them offline. Reports are deterministic:
// same config + seed => byte-identical JSON.

struct ScenarioConfig {
    std::string scenario;

    // Domain overrides; zero/empty means "use the scenario's default".
    std::size_t grid_n = 0;
    double grid_spacing = 0.0;
    double grid_origin = 0.0; // consulted only when grid_n is set
    double t1 = 0.0;
    double t2 = 0.0; // window override active when t2 > t1
    double dt = 0.0;
    std::size_t stride = 0;

    std::size_t ensemble = 0; // trajectory count / sample count scale
    std::uint64_t seed = 20240819;
    unsigned threads = 0;

    // Measured-outcome knobs (position-measurement scenario).
    double outcome_center = 1.0; // X, the recorded outcome position
    double sigma_f = 0.0;        // final packet width; 0 = 4 * grid spacing

    // Tolerance overrides.
    double witness_threshold = 1e-3; // minimum detectable field difference
    double tv_tolerance = 0.02;      // sampled-vs-quadrature total variation

    std::string out_dir; // empty = keep everything in-memory, no artifacts
};

struct Assertion {
    std::string name;
    bool pass = false;
    double value = 0.0; // measured quantity
    double bound = 0.0; // bound it was held against
};

struct ScenarioReport {
    std::string scenario;
    bool pass = false; // conjunction of assertions
    std::vector<Assertion> assertions;
    std::vector<std::pair<std::string, double>> metrics; // extra exported values
    std::vector<std::string> artifacts;                  // files written under out_dir
};

std::string to_json(const ScenarioReport& report);

ScenarioReport run_position_measurement_limit(const ScenarioConfig& config);
ScenarioReport run_retrocausal_velocity(const ScenarioConfig& config);
ScenarioReport run_measurement_branching(const ScenarioConfig& config);
ScenarioReport run_epr_zigzag(const ScenarioConfig& config);
ScenarioReport run_negative_density_worldline(const ScenarioConfig& config);
ScenarioReport run_dirac_demo(const ScenarioConfig& config);

/// Registry order is fixed; run_scenario throws ConfigError for unknown ids
/// or an unsatisfiable config (t1 >= t2, zero-cell grid, outcome center off
/// the grid, ...).
const std::vector<std::string>& scenario_ids();
ScenarioReport run_scenario(const std::string& id, const ScenarioConfig& config);

} // namespace csbohm

#endif
