#ifndef CSBOHM_STATISTICS_HPP
#define CSBOHM_STATISTICS_HPP

#include <functional>
#include <string>
#include <vector>

#include "csbohm/field.hpp"

namespace csbohm {

/// Mutually orthonormal outcome states for the measurement that closes a
/// window. A run has exactly one final basis; a chain of measurements is a
/// chain of runs.
struct FinalBasis {
    std::vector<WavefunctionField> members;
    std::vector<std::string> labels; // parallel to members
};

/// Checks mutual orthonormality (Gram = identity within 1e-8) and pairs the
/// members with labels ("0", "1", ... when none are given).
FinalBasis make_final_basis(std::vector<WavefunctionField> members,
                            std::vector<std::string> labels = {});

/// One normalized spike per grid node; complete by construction.
FinalBasis position_basis(const Grid1D& grid, double time);

/// L2 norm of the component of psi outside the basis span.
double completeness_defect(const FinalBasis& basis, const WavefunctionField& psi);

/// Probability of the outcome psi_f: |<psi_f|psi_i>|^2. Both states must be
/// normalized.
double final_state_weight(const WavefunctionField& psi_f, const WavefunctionField& psi_i);

/// Signed joint density of position and outcome over the grid:
///   Re[<psi_i|psi_f> psi_f*(x) psi_i(x)],
/// which factors pointwise into conditional density times final_state_weight.
RVec joint_density(const WavefunctionField& psi_i, const WavefunctionField& psi_f);

struct MarginalResult {
    RVec density;                  // joint density summed over the basis
    double max_deviation = 0.0;    // sup |density - |psi_i|^2|
    double l1_error = 0.0;         // integral of the same deviation
    double defect = 0.0;           // completeness defect of psi_i in the basis
    bool incomplete_basis = false; // defect above 1e-6
    std::string note;
};

/// Outcome-summed position density. Recovers |psi_i|^2 when the basis covers
/// psi_i; always nonnegative up to the incompleteness slack (asserted).
MarginalResult marginal_position(const WavefunctionField& psi_i, const FinalBasis& basis);

/// Real density over the pair grid, values[i1 * grid2.n + i2].
struct PairDensity {
    Grid1D grid1, grid2;
    RVec values;
    double time = 0.0;
};

/// The uncorrelated per-outcome form: product of the two single-particle
/// marginals of the symmetric pair density.
PairDensity appendix_product_density(const TwoParticleField& Psi_i,
                                     const TwoParticleField& Psi_f, const Amplitude& a);

/// Joint density summed over the grid-position product basis at Psi_i's own
/// time: the usual |Psi_i|^2 comes back, correlations included.
PairDensity appendix_marginal_recovery(const TwoParticleField& Psi_i);

/// Pearson correlation of (x1, x2) under the density (normalization free).
double correlation(const PairDensity& rho);

/// One Monte Carlo draw: a value (position, or outcome index) with its
/// signed weight.
struct SignedSample {
    double value = 0.0;
    double weight = 1.0;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    double ess = 0.0;        // (sum |w|)^2 / sum w^2
    double negativity = 0.0; // sum max(0, -w) / sum |w|
    std::size_t count = 0;
};

/// Weighted ratio estimate of E[statistic(value)] over a signed ensemble
/// (identity statistic when none is given). Sums run in input order, so equal
/// inputs give bit-equal estimates. Throws UnreliableEstimate when the
/// effective sample size drops below 10 or the signed weights cancel to
/// within estimator noise (|sum w| < 3 sqrt(sum w^2)).
Estimate signed_estimator(const std::vector<SignedSample>& samples,
                          const std::function<double(double)>& statistic = {});

std::string to_json(const Estimate& e);

} // namespace csbohm

#endif
