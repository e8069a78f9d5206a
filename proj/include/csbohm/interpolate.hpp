#ifndef CSBOHM_INTERPOLATE_HPP
#define CSBOHM_INTERPOLATE_HPP

#include <vector>

#include "csbohm/guidance.hpp"

namespace csbohm {

/// Spatial interpolation of the guidance fields between grid points. Both
/// variants are periodic; spectral is exact for band-limited fields, cubic
/// (Catmull-Rom) is much cheaper per query and the ensemble default.
enum class SpaceInterp { spectral, cubic };

struct FlowSample {
    double rho = 0.0;
    double j = 0.0;
    double v = 0.0;
    bool v_defined = false;
};

/// Continuous (t, x) view of the density/current pair built from snapshot
/// records: guidance fields are precomputed per aligned snapshot, linear in
/// time between slices. Immutable and safe to share across threads.
class FieldInterpolator {
public:
    /// Symmetric model over an evolved pair.
    FieldInterpolator(const EvolutionRecord& rec_i, const EvolutionRecord& rec_f,
                      const Amplitude& a, SpaceInterp mode = SpaceInterp::cubic,
                      Normalization norm = Normalization::complex_amplitude);
    /// Standard model over a single record (rho = |psi|^2).
    explicit FieldInterpolator(const EvolutionRecord& rec, SpaceInterp mode = SpaceInterp::cubic);

    FlowSample sample(double t, double x) const;

    const Grid1D& grid() const { return grid_; }
    double t_min() const { return times_.front(); }
    double t_max() const { return times_.back(); }
    /// Largest gap between stored slices (the trajectory stride check).
    double snapshot_gap() const { return gap_; }
    /// Turning threshold: kEpsilonTurnRel times the max |rho| over the window.
    double eps_turn() const { return eps_turn_; }
    GuidanceModel model() const { return model_; }

    std::size_t slice_count() const { return slices_.size(); }
    const GuidanceField& slice(std::size_t m) const { return slices_[m]; }
    double slice_time(std::size_t m) const { return times_[m]; }

private:
    void finalize();
    double eval(const RVec& values, const CVec& coeffs, double x) const;

    Grid1D grid_;
    std::vector<double> times_;
    std::vector<GuidanceField> slices_;
    std::vector<CVec> rho_hat_, j_hat_; // populated in spectral mode
    SpaceInterp mode_;
    GuidanceModel model_ = GuidanceModel::symmetric;
    double eps_turn_ = 0.0;
    double gap_ = 0.0;
};

struct DiracSample {
    double j0 = 0.0;
    double j1 = 0.0;
    double rho0 = 0.0;
    double u0 = 0.0;
    double u1 = 0.0;
    bool u_defined = false;
};

/// Same construction over spinor records; interpolates the 4-current and
/// derives rest density and 4-velocity at the query point.
class SpinorInterpolator {
public:
    SpinorInterpolator(const SpinorRecord& rec_i, const SpinorRecord& rec_f, const Amplitude& a,
                       SpaceInterp mode = SpaceInterp::cubic);

    DiracSample sample(double t, double x) const;

    const Grid1D& grid() const { return grid_; }
    double t_min() const { return times_.front(); }
    double t_max() const { return times_.back(); }
    double eps_turn() const { return eps_turn_; }
    std::size_t slice_count() const { return slices_.size(); }
    const DiracGuidance& slice(std::size_t m) const { return slices_[m]; }

private:
    double eval(const RVec& values, const CVec& coeffs, double x) const;

    Grid1D grid_;
    std::vector<double> times_;
    std::vector<DiracGuidance> slices_;
    std::vector<CVec> j0_hat_, j1_hat_;
    SpaceInterp mode_;
    double eps_turn_ = 0.0;
};

} // namespace csbohm

#endif
