#pragma once

#include "hallpump/evolution.hpp"
#include "hallpump/quasiadiabatic.hpp"

namespace hallpump::transport {

using evolution::DrivingProfile;
using evolution::TwistApplier;
using kernels::MatrixXcd;
using kernels::VectorXcd;
using lattice::NamedRegions;
using observables::HamiltonianFamily;
using quasiadiabatic::WeightFilter;
using spectral::LanczosOptions;

struct TransportOptions {
    int quad_intervals = 64;   // Simpson intervals for the parallel quadrature
    double cg_tol = 1e-11;
    LanczosOptions lanczos{};
    int snapshot_extra = 4;
    double rad_per_node = 0.35; // Schrodinger quadrature density: node spacing
                                // such that |H| ds / eps per interval <= this
    int min_quad_intervals = 128;
    evolution::SchrodingerOptions stepper{};
};

/// Charge transported across nu_- under parallel transport, as the integrated
/// nu_-"-assigned current of the generator: dQ = p^-1 sum_k int <psi_k|
/// (i[K_phi, Q])_- |psi_k> dphi. The generator current is split by assigning
/// each driven-bond component K_b (the filter applied to one term of
/// d_phi H_phi) to the nu boundary line nearest to its bond; equidistant
/// bonds contribute half to each side, keeping the two-sided sum exact.
struct ParallelTransportResult {
    double dq_minus = 0.0;
    double dq_plus = 0.0;
    double two_boundary_total = 0.0; // integrated <i[K,Q]>, should vanish
    double max_imag = 0.0;
    double quad_error = 0.0; // |Simpson(fine) - Simpson(coarse half-grid)|
    std::vector<std::pair<int, double>> bond_contributions; // (distance to nu_- cut, value)
    double min_gap_seen = 1e300;
};

/// Static (snapshot-frame) evaluation: the instantaneous ground frame stands
/// in for the parallel-transported one, which it equals up to gauge. Exact
/// ground-referenced resolvent form of K; valid at any sector dimension.
ParallelTransportResult transported_charge_parallel(const HamiltonianFamily& family,
                                                    const fock::SectorBasis& basis,
                                                    const NamedRegions& regions,
                                                    const WeightFilter& filter, int p_rank,
                                                    const TransportOptions& opts = {});

/// Same integrand evaluated on externally supplied frames (e.g. a dynamic
/// propagate_parallel run); frames[i] must correspond to phis[i].
ParallelTransportResult transported_charge_parallel_frames(
    const HamiltonianFamily& family, const fock::SectorBasis& basis, const NamedRegions& regions,
    const WeightFilter& filter, const std::vector<double>& phis,
    const std::vector<MatrixXcd>& frames, const TransportOptions& opts = {});

struct EpsTransportResult {
    double eps = 0.0;
    double dq_minus = 0.0;
    double dq_plus = 0.0;
    double max_imag = 0.0;
    double quad_error = 0.0;
    double final_ground_overlap = 0.0; // fidelity of the final frame with ran P
    evolution::PropagationDiagnostics diag;
};

/// Charge transported by the driven Schrodinger flow at rate eps:
/// dQ_eps = (p eps)^-1 sum_k int <psi_k(s)| sum_X j_{s,nu_-}(X) |psi_k(s)> ds,
/// with the currents rebuilt from H_{phi(s)} at each quadrature node.
EpsTransportResult transported_charge_eps(const HamiltonianFamily& family,
                                          const fock::SectorBasis& basis,
                                          const NamedRegions& regions,
                                          const DrivingProfile& profile, double eps,
                                          const MatrixXcd& frame0,
                                          const TransportOptions& opts = {});

struct FitResult {
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    int window_lo = 0; // inclusive indices into the input, eps descending
    int window_hi = -1;
    double floor = 0.0;
    bool floor_limited = false;
};

/// Least-squares slope of log|deviation| vs log(eps) on the window where the
/// deviation exceeds 10x the numerical floor.
FitResult exactness_fit(const std::vector<double>& eps, const std::vector<double>& deviation,
                        double floor_abs, int min_points = 3);

} // namespace hallpump::transport
