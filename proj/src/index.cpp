#include "hallpump/index.hpp"

#include <cmath>

namespace hallpump::index {

using kernels::CsrMatrix;
using kernels::MatrixXcd;
using spectral::LinearOp;
using spectral::SpectralSnapshot;

std::vector<FluxLeg> legs_of(PathKind kind) {
    switch (kind) {
        case PathKind::identity:
        case PathKind::global_phase: return {};
        case PathKind::parallel_cycle: return {{0.0, kTwoPi}};
        case PathKind::double_cycle: return {{0.0, kTwoPi}, {kTwoPi, 2.0 * kTwoPi}};
        case PathKind::reversed_cycle: return {{kTwoPi, 0.0}};
    }
    throw PreconditionError("unknown path kind");
}

namespace {

// Snapshot frames along one leg plus the leg's transport quadrature.
transport::ParallelTransportResult leg_transport(const HamiltonianFamily& family,
                                                 const fock::SectorBasis& basis,
                                                 const NamedRegions& regions,
                                                 const WeightFilter& filter, int p_rank,
                                                 const FluxLeg& leg,
                                                 const TransportOptions& opts,
                                                 MatrixXcd& frame_start, MatrixXcd& frame_end) {
    int intervals = ((opts.quad_intervals + 3) / 4) * 4;
    const int n = intervals + 1;
    std::vector<double> phis(n);
    for (int i = 0; i < n; ++i)
        phis[i] = leg.phi_from + (leg.phi_to - leg.phi_from) * i / intervals;

    std::vector<MatrixXcd> frames(n);
    MatrixXcd warm;
    for (int i = 0; i < n; ++i) {
        CsrMatrix h = observables::assemble(family.at_phi(phis[i]), basis);
        LinearOp op = spectral::csr_op(h);
        SpectralSnapshot snap = spectral::ground_snapshot(op, p_rank, opts.snapshot_extra,
                                                          opts.lanczos,
                                                          warm.cols() > 0 ? &warm : nullptr);
        warm = snap.low_vectors;
        frames[i] = snap.ground_vectors;
    }
    frame_start = frames.front();
    frame_end = frames.back();
    return transport::transported_charge_parallel_frames(family, basis, regions, filter, phis,
                                                         frames, opts);
}

} // namespace

IndexResult index_over_legs(const HamiltonianFamily& family, const fock::SectorBasis& basis,
                            const NamedRegions& regions, const WeightFilter& filter, int p_rank,
                            const std::vector<FluxLeg>& legs, const IndexOptions& opts) {
    IndexResult res;
    if (legs.empty()) {
        res.exact_zero = true;
        return res;
    }

    MatrixXcd path_start, path_end, a, b;
    double total = 0.0;
    for (size_t i = 0; i < legs.size(); ++i) {
        auto leg = leg_transport(family, basis, regions, filter, p_rank, legs[i], opts.transport,
                                 a, b);
        if (i == 0) path_start = a;
        path_end = b;
        total += leg.dq_minus;
    }

    res.commutation_defect = spectral::projector_distance(path_start, path_end);
    if (res.commutation_defect > opts.commutation_tol)
        throw PreconditionError("index precondition violated: [U, P] defect " +
                                std::to_string(res.commutation_defect) + " exceeds tolerance " +
                                std::to_string(opts.commutation_tol));

    res.value = p_rank * total;
    res.nearest_int_residual = std::abs(res.value - std::round(res.value));
    return res;
}

IndexResult index_of(const HamiltonianFamily& family, const fock::SectorBasis& basis,
                     const NamedRegions& regions, const WeightFilter& filter, int p_rank,
                     PathKind kind, const IndexOptions& opts) {
    if (kind == PathKind::global_phase) {
        // generator theta Q_Gamma: its commutator with Q_nu vanishes term by
        // term, so the assigned current and hence the index are exactly zero
        observables::ExtensiveObservable q_tot;
        q_tot.range = 1;
        q_tot.strength = 1.0;
        for (int i = 0; i < family.torus().num_sites(); ++i) {
            observables::LocalTerm t;
            t.support = {i};
            fock::Monomial n;
            n.coeff = 1.0;
            n.factors = {{i, false}, {i, true}};
            t.monomials = {n};
            q_tot.terms.push_back(std::move(t));
        }
        auto comm = observables::boundary_commutator(family.torus(), q_tot, regions.nu);
        IndexResult res;
        res.exact_zero = comm.terms.empty();
        if (!res.exact_zero)
            throw PreconditionError("global charge generator unexpectedly carries current");
        return res;
    }
    return index_over_legs(family, basis, regions, filter, p_rank, legs_of(kind), opts);
}

double additivity_residual(const HamiltonianFamily& family, const fock::SectorBasis& basis,
                           const NamedRegions& regions, const WeightFilter& filter, int p_rank,
                           PathKind u1, PathKind u2, const IndexOptions& opts) {
    std::vector<FluxLeg> composed = legs_of(u2); // U1 o U2: U2 acts first
    for (const auto& l : legs_of(u1)) composed.push_back(l);
    IndexResult both = index_over_legs(family, basis, regions, filter, p_rank, composed, opts);
    IndexResult first = index_of(family, basis, regions, filter, p_rank, u1, opts);
    IndexResult second = index_of(family, basis, regions, filter, p_rank, u2, opts);
    return std::abs(both.value - first.value - second.value);
}

} // namespace hallpump::index
