#pragma once

#include "hallpump/evolution.hpp"

namespace hallpump::lrdiag {

using kernels::VectorXcd;
using lattice::Site;
using spectral::LinearOp;

/// Estimated commutator norms C(t, d) = max_{y: d(x,y)=d} ||[tau_t(O_x), O_y]||
/// for single-site density probes O = n - 1/2, with the norm lower-bounded by
/// maximization over random sector vectors.
struct ConeProfile {
    std::vector<double> t_grid;
    std::vector<int> d_grid;
    std::vector<std::vector<double>> c; // [t][d]
    double peak = 0.0;
    double v_hat = 0.0;          // affine cone fit (finite-range generators)
    double cone_offset = 0.0;
    double power_coeff = 0.0;    // c in d* = c t^alpha (generalized generators)
    double power_alpha = 2.0;
    std::string tail_class;      // "exponential" | "slower_than_exponential"
    std::string generator_class; // "finite_range" | "generalized"
};

struct ConeOptions {
    int n_random = 20;
    uint64_t seed = 2024;
    double krylov_tol = 1e-9;
    int krylov_m = 28;
    double threshold_frac = 1e-2; // cone edge: C >= frac * peak
    int probes_per_distance = 0;  // 0: all sites at each distance
    bool generalized = false;     // power-law cone fit instead of affine
    double wraparound_velocity = 2.5; // used for the t-grid cap warning
};

/// Scan the cone for the dynamics generated by a Hermitian operator.
ConeProfile cone_scan(const LinearOp& gen, const fock::SectorBasis& basis, Site probe_site,
                      const std::vector<double>& t_grid, const std::vector<int>& d_grid,
                      const ConeOptions& opts = {});

/// Default t-grid capped so v t stays below L/2 - 2 (wrap-around guard).
std::vector<double> default_t_grid(int L, double velocity, int points);

} // namespace hallpump::lrdiag
