#ifndef CSBOHM_ERRORS_HPP
#define CSBOHM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace csbohm {

// Structural misuse: mismatched grids, bad windows, malformed configs.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridMismatch : StructuralError {
    using StructuralError::StructuralError;
};

struct ConfigError : StructuralError {
    using StructuralError::StructuralError;
};

// |<psi_f|psi_i>| below the degeneracy cutoff; the run cannot be seeded.
struct DegenerateOverlap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Contraction of a correlated state with an outcome produced a (near-)zero
// function; the outcome is incompatible with the initial state.
struct DegenerateReduction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PacketTooNarrow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PacketTooWide : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IncompleteBasis : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnreliableEstimate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised only for seeds outside the usable domain; a curve that reaches the
// grid boundary mid-flight ends with WorldLine status left_grid instead.
struct LeftGrid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LeftTimeWindow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StagnationPoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RestDensityVanishes : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace csbohm

#endif
