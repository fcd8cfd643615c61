#pragma once

#include "hallpump/fock.hpp"
#include "hallpump/observables.hpp"
#include "hallpump/spectral.hpp"

namespace hallpump::quasiadiabatic {

using kernels::CsrMatrix;
using kernels::DenseSpectrum;
using kernels::MatrixXcd;
using kernels::VectorXcd;
using kernels::VectorXd;
using observables::ExtensiveObservable;
using observables::HamiltonianFamily;
using observables::LocalTerm;
using spectral::LinearOp;
using spectral::SpectralSnapshot;

/// Spectral weight w with w(omega) = -i/omega exactly for |omega| >= gamma and
/// a purely imaginary odd interpolation inside the gap. Two interpolations are
/// shipped: `bump` (default, C-infinity: w = -i (1 - rho(omega))/omega with a
/// compactly supported smooth bump rho normalized to rho(0)=1) and `cubic`
/// (C^1 odd polynomial). The in-gap choice affects locality only, never the
/// transport of ran P; the cubic variant doubles as a deformation probe.
class WeightFilter {
  public:
    enum class Kind { bump, cubic };

    explicit WeightFilter(double gamma, Kind kind = Kind::bump);

    double gamma() const { return gamma_; }
    Kind kind() const { return kind_; }
    cplx w(double omega) const;

    /// Fourier profile of the bump variant: rho_hat(omega), 1 at 0, supported
    /// in [-gamma, gamma].
    double rho_hat(double omega) const;

    /// Time-domain weight W(u) with int W(u) e^{i u omega} du = w(omega)
    /// (bump variant only); |W(u)| decays faster than any inverse power.
    double time_weight(double u) const;

  private:
    double gamma_;
    Kind kind_;
};

/// K in the spectral-filter form, assembled densely from a full
/// eigendecomposition: <m|K|n> = w(E_m - E_n) <m|dH|n>. Exact at desk scale.
MatrixXcd build_K_dense(const DenseSpectrum& spec, const CsrMatrix& dh, const WeightFilter& f);

/// K in the eigenbasis (K_hat); K = V K_hat V^dag. Cheaper to apply repeatedly
/// at large dimension via three gemv's.
struct EigenbasisOperator {
    const DenseSpectrum* spec = nullptr;
    MatrixXcd k_hat;
    VectorXcd apply(const VectorXcd& psi) const;
};
EigenbasisOperator build_K_eigenbasis(const DenseSpectrum& spec, const CsrMatrix& dh,
                                      const WeightFilter& f);

/// Time-quadrature form of K (cross-check of the integral representation):
/// K = int W(u) e^{iuH} dH e^{-iuH} du over a truncated trapezoid u-grid,
/// evaluated in the eigenbasis of H. Bump filter only.
MatrixXcd build_K_quadrature(const DenseSpectrum& spec, const CsrMatrix& dh,
                             const WeightFilter& f, double u_max, int n_u);

/// Resolvent-form K application for dimensions beyond dense diagonalization.
/// Exact on the ground frame: K (P psi) = -i (H - E0)^{-1} (1-P) dH (P psi);
/// the orthogonal remainder is handled by the Hermitian conjugate block plus
/// the filter on the computed low eigenpairs (high-high transitions of the
/// remainder are dropped; the remainder itself is integrator-noise sized).
class ResolventK {
  public:
    ResolventK(const LinearOp& h, const SpectralSnapshot& snap, CsrMatrix dh,
               const WeightFilter& f, double cg_tol = 1e-11, int cg_maxit = 5000);

    /// Full Hermitian-consistent application.
    VectorXcd apply(const VectorXcd& psi) const;

    /// Ground-block action only: -i R (1-P) dH (P psi). Exact for psi in ran P.
    VectorXcd apply_ground_block(const VectorXcd& psi) const;

    /// Deflated CG solve (H - E0) x = (1-P) rhs, x orthogonal to the frame.
    VectorXcd solve(const VectorXcd& rhs) const;

    const SpectralSnapshot& snapshot() const { return *snap_; }

  private:
    const LinearOp* h_;
    const SpectralSnapshot* snap_;
    CsrMatrix dh_;
    WeightFilter filter_;
    double cg_tol_;
    int cg_maxit_;
    MatrixXcd d_low_; // excited-low block of dH in the snapshot eigenvectors
};

/// Gap precondition shared by all K builders.
void require_gap(const SpectralSnapshot& snap, const WeightFilter& f);

/// r -> relative tail of K outside the r-fattening of `region`, probed by
/// single-site occupation-phase unitaries: tail(r) = max over sites x with
/// d(x, region) > r of ||[K, 1 - 2 n_x]|| / (2 ||K||). For number-conserving
/// K the pi-phase probe maximizes over the whole single-site phase family.
struct LocalityProfile {
    std::vector<int> r;
    std::vector<double> relative_tail;
};
LocalityProfile locality_profile(const std::function<VectorXcd(const VectorXcd&)>& apply_k,
                                 double norm_k, const fock::SectorBasis& basis,
                                 const lattice::Region& region, int power_iters = 25,
                                 uint64_t seed = 97);

/// The eta_- / eta_+ halves of i [Q_eta, H] = d/dphi H~_phi at phi = 0,
/// extracted through the boundary-split machinery. minus equals the twist
/// derivative d_phi H_phi|_0 exactly at finite range.
struct TwistDerivativeSplit {
    std::vector<LocalTerm> minus_terms;
    std::vector<LocalTerm> plus_terms;
};
TwistDerivativeSplit twist_derivative_split(const HamiltonianFamily& family,
                                            const lattice::Region& eta_minus,
                                            const lattice::Region& eta_plus);

} // namespace hallpump::quasiadiabatic
