#ifndef CSBOHM_TRAJECTORY_HPP
#define CSBOHM_TRAJECTORY_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "csbohm/interpolate.hpp"

namespace csbohm {

/// Default adaptive-integration tolerance.
inline constexpr double kTrajectoryTol = 1e-8;
/// Turning points are located to this width in the curve parameter.
inline constexpr double kTurningLocTol = 1e-10;

enum class LineStatus {
    completed,    // requested span fully integrated
    window_edge,  // curve left through a time boundary of the record (normal)
    turning_error,
    left_grid,
    stagnation,
    failed,
};

/// A single particle world line. Parallel arrays, one entry per curve point;
/// lambda is the curve parameter (strictly increasing), tau the accumulated
/// proper time. turning_points index the points where dt/dlambda flips sign.
struct WorldLine {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> lambda;
    std::vector<double> tau;
    std::vector<std::size_t> turning_points;
    std::vector<CausalCharacter> segment_character; // size() - 1 entries
    LineStatus status = LineStatus::completed;
    std::string note;
    bool resolution_warning = false;
    double weight = 1.0;

    std::size_t size() const { return t.size(); }
};

/// Raised when a time-parametrized integration reaches |rho| < eps_turn; the
/// curve up to the abort point comes along.
struct TurningPointEncountered : std::runtime_error {
    WorldLine partial;
    TurningPointEncountered(const std::string& msg, WorldLine line)
        : std::runtime_error(msg), partial(std::move(line)) {}
};

/// What to do when the time-parametrized integrator hits a turning point.
enum class TurningPolicy { error, switch_to_lambda };

/// dx/dt = v(t, x) from t_start to t_end (t_end > t_start), adaptive RK45.
/// lambda is t - t_start. With TurningPolicy::switch_to_lambda the whole run
/// is delegated to the lambda-parametrized integrator, which survives the
/// turning (capped at a few (t,x)-arc circuits of the window so closed orbits
/// terminate); with ::error a turning raises TurningPointEncountered. A curve
/// that runs off the spatial grid ends with status left_grid; only a seed
/// outside the grid throws LeftGrid.
WorldLine integrate_time_param(const FieldInterpolator& interp, double x0, double t_start,
                               double t_end, TurningPolicy policy = TurningPolicy::error,
                               double tol = kTrajectoryTol);

/// Integral curve of the spacetime current: dt/dlambda = rho, dx/dlambda = j.
/// Stepped in unit spacetime arc length for stability, with the true lambda
/// accumulated as a quadrature; passes smoothly through rho = 0 where j != 0
/// and records each crossing as a turning point. Ends at a window edge
/// (status window_edge), after lambda_span (status completed), or on running
/// off the spatial grid (status left_grid). Note lambda grows like 1/|(rho,j)|,
/// so a finite lambda_span can be consumed quickly inside low-density regions.
WorldLine integrate_lambda_param(const FieldInterpolator& interp, double t0, double x0,
                                 double lambda_span = std::numeric_limits<double>::infinity(),
                                 double tol = kTrajectoryTol);

/// Fill tau and segment_character from the (t, x) points: per segment
/// dtau = |dt^2 - dx^2|^{1/2}, character by the sign of dt^2 - dx^2.
WorldLine proper_time(WorldLine line);

/// Integral curve of the Dirac 4-current, proper time accumulated along the
/// way (dx^nu/dtau = u^nu); runs until tau_span or a window edge. Sign flips
/// of j0 are recorded as turning points.
WorldLine dirac_trajectory(const SpinorInterpolator& interp, double t0, double x0,
                           double tau_span = std::numeric_limits<double>::infinity(),
                           double tol = kTrajectoryTol);

/// Ensemble seed: starting position at the record's first slice, with the
/// sign weight attached by sample_seeds for signed densities.
struct Seed {
    double x = 0.0;
    double weight = 1.0;
};

enum class ParamMode { time, lambda };

struct EnsembleOptions {
    ParamMode mode = ParamMode::time;
    TurningPolicy on_turning = TurningPolicy::error;
    double tol = kTrajectoryTol;
    unsigned threads = 0; // 0 = hardware concurrency
    double lambda_span = std::numeric_limits<double>::infinity();
};

/// Independent world lines from every seed, parallel over seeds, output order
/// and content deterministic. Per-line failures land in the line's status and
/// note instead of aborting the batch.
std::vector<WorldLine> ensemble(const FieldInterpolator& interp, const std::vector<Seed>& seeds,
                                const EnsembleOptions& opt = {});

/// Draw seed positions from |rho| on a slice (cell-weighted CDF with uniform
/// in-cell jitter); each seed carries sign(rho) of its cell as weight.
std::vector<Seed> sample_seeds(const GuidanceField& slice, std::size_t count,
                               std::uint64_t rng_seed);

} // namespace csbohm

#endif
