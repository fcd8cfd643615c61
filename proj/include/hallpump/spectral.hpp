#pragma once

#include <functional>

#include "hallpump/kernels.hpp"
#include "hallpump/observables.hpp"

namespace hallpump::spectral {

using kernels::CsrMatrix;
using kernels::MatrixXcd;
using kernels::VectorXcd;
using kernels::VectorXd;

/// Matrix-free Hermitian operator.
struct LinearOp {
    int64_t dim = 0;
    std::function<void(const VectorXcd&, VectorXcd&)> apply;
};

LinearOp csr_op(const CsrMatrix& a);

struct LanczosOptions {
    int max_iter = 600;
    double tol = 1e-12;   // residual tolerance relative to the spectral scale
    uint64_t seed = 7;
    int block_reserve = 0;
};

/// Lowest k eigenpairs by Lanczos with full reorthogonalization and one-by-one
/// deflation (robust for degenerate clusters). Deterministic for a fixed seed;
/// pass warm_start columns to bias the start vectors.
struct EigenPairs {
    VectorXd values;
    MatrixXcd vectors;
    VectorXd residuals;
};
EigenPairs lowest_eigenpairs(const LinearOp& op, int k, const LanczosOptions& opts = {},
                             const MatrixXcd* warm_start = nullptr);

/// Ground-state data at one parameter value.
struct SpectralSnapshot {
    double s = 0.0;
    double phi = 0.0;
    double ground_energy = 0.0;          // E^0
    double first_excited_energy = 0.0;   // E^1 = (p+1)-th level
    double gap = 0.0;                    // E^1 - (p-th level)
    int rank = 1;                        // p
    bool degeneracy_ambiguous = false;   // |E_{p+1} - E_p| below tolerance
    MatrixXcd ground_vectors;            // dim x p, orthonormal
    VectorXd low_values;                 // p + extra lowest levels
    MatrixXcd low_vectors;               // matching columns
    double max_residual = 0.0;
};

/// Lowest p_expected + extra eigenpairs with a safety margin, residual checks
/// and a near-degeneracy flag at the p boundary.
SpectralSnapshot ground_snapshot(const LinearOp& op, int p_expected, int extra = 4,
                                 const LanczosOptions& opts = {},
                                 const MatrixXcd* warm_start = nullptr,
                                 double degeneracy_tol = 1e-8);

struct GapScan {
    std::vector<SpectralSnapshot> snapshots;
    double min_gap = 0.0;
    bool rank_constant = true;
};

/// Snapshots of the twist family over a phi grid. Throws if any gap falls
/// below `min_gap_abort` (Assumption-style gap verification).
GapScan gap_scan(const observables::HamiltonianFamily& family, const fock::SectorBasis& basis,
                 const std::vector<double>& phis, int p_expected, double min_gap_abort,
                 const LanczosOptions& opts = {});

/// || frame frame^dag - other other^dag || for orthonormal frames (exact for
/// rank-1; Frobenius-based bound otherwise).
double projector_distance(const MatrixXcd& frame_a, const MatrixXcd& frame_b);

} // namespace hallpump::spectral
