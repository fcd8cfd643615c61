#pragma once

#include "hallpump/transport.hpp"

namespace hallpump::index {

using lattice::NamedRegions;
using observables::HamiltonianFamily;
using quasiadiabatic::WeightFilter;
using transport::TransportOptions;

/// Generator-represented unitaries: a path of Hermitian charge-conserving
/// generators, here encoded as directed flux legs of the twist family (the
/// parallel-transport generator K_phi integrated over each leg), plus the two
/// degenerate cases with an explicitly zero current split.
struct FluxLeg {
    double phi_from = 0.0;
    double phi_to = 0.0;
};

enum class PathKind {
    identity,      // zero generator
    global_phase,  // exp(i theta Q_Gamma)
    parallel_cycle,
    double_cycle,
    reversed_cycle,
};

std::vector<FluxLeg> legs_of(PathKind kind);

struct IndexResult {
    double value = 0.0;
    double nearest_int_residual = 0.0;
    double commutation_defect = 0.0;
    bool exact_zero = false; // identity / global phase: split vanishes symbolically
};

struct IndexOptions {
    TransportOptions transport{};
    double commutation_tol = 1e-6;
};

/// Ind_P(U) = Tr(P (U* Q U - Q)_-), evaluated as p frame-vector expectations
/// of the integrated nu_-assigned generator current (the transport machinery).
/// Refuses, reporting the measured defect, when the path endpoints do not
/// return P to itself within the commutation tolerance.
IndexResult index_over_legs(const HamiltonianFamily& family, const fock::SectorBasis& basis,
                            const NamedRegions& regions, const WeightFilter& filter, int p_rank,
                            const std::vector<FluxLeg>& legs, const IndexOptions& opts = {});

IndexResult index_of(const HamiltonianFamily& family, const fock::SectorBasis& basis,
                     const NamedRegions& regions, const WeightFilter& filter, int p_rank,
                     PathKind kind, const IndexOptions& opts = {});

/// | Ind(U1 o U2) - Ind(U1) - Ind(U2) |, with the composition's index computed
/// from the concatenated generator path (U2 runs first).
double additivity_residual(const HamiltonianFamily& family, const fock::SectorBasis& basis,
                           const NamedRegions& regions, const WeightFilter& filter, int p_rank,
                           PathKind u1, PathKind u2, const IndexOptions& opts = {});

} // namespace hallpump::index
