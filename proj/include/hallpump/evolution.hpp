#pragma once

#include <iosfwd>

#include "hallpump/observables.hpp"
#include "hallpump/quasiadiabatic.hpp"
#include "hallpump/spectral.hpp"

namespace hallpump::evolution {

using kernels::CsrMatrix;
using kernels::MatrixXcd;
using kernels::VectorXcd;
using observables::HamiltonianFamily;
using spectral::LinearOp;

/// Flux ramp phi: [0,1] -> [0, 2 pi]. The compliant profile is the normalized
/// integral of exp(-1/(u(1-u))): all endpoint derivatives vanish. The ramp
/// phi = 2 pi s deliberately violates that, for contrast experiments.
class DrivingProfile {
  public:
    enum class Kind { compliant, ramp };

    explicit DrivingProfile(Kind kind);

    Kind kind() const { return kind_; }
    double phi(double s) const;
    double dphi(double s) const;

  private:
    Kind kind_;
    std::vector<double> cumulative_; // compliant: B on a uniform grid
    double norm_ = 1.0;
};

/// exp(i tau A) v for Hermitian A by adaptive Lanczos substepping.
/// `defect` (optional) accumulates |  ||out|| - ||v||  |.
VectorXcd expm_krylov(const LinearOp& a, const VectorXcd& v, double tau, double tol = 1e-11,
                      int m = 28, double* defect = nullptr);

/// H_phi as a matrix-free operator: base part plus phased cut-crossing bonds.
/// Avoids reassembly along the driving path.
class TwistApplier {
  public:
    TwistApplier(const HamiltonianFamily& family, const fock::SectorBasis& basis);

    LinearOp at_phi(double phi) const; // applier valid while *this lives
    double norm_estimate() const { return norm_est_; }
    int64_t dim() const { return dim_; }

  private:
    struct PhasedPart {
        CsrMatrix mat;
        int weight; // coefficient picks up e^{i phi weight}
    };
    CsrMatrix base_;
    std::vector<PhasedPart> phased_;
    int64_t dim_ = 0;
    double norm_est_ = 0.0;
    mutable VectorXcd scratch_;
};

struct PropagationDiagnostics {
    int64_t steps = 0;
    double max_unitarity_defect = 0.0;
    double max_gram_defect = 0.0;
    double min_step = 1e300;
};

struct PropagationRun {
    double eps = 0.0;
    std::vector<double> s_nodes;
    std::vector<double> phi_nodes;
    MatrixXcd final_frame;
    PropagationDiagnostics diag;
};

/// Called at every requested node with the current frame.
using FrameObserver =
    std::function<void(int node_index, double s, double phi, const MatrixXcd& frame)>;

struct SchrodingerOptions {
    double krylov_tol = 1e-11;
    int krylov_m = 28;
    double rad_per_step = 1.5; // target |H| h / eps per midpoint step
    double min_step = 1e-10;   // below this the run aborts as stiff
};

/// Driven Schrodinger flow i eps d_s psi = H_{phi(s)} psi for each frame
/// column, exponential-midpoint stepping between the given s-nodes.
PropagationRun propagate_schrodinger(const TwistApplier& h, const DrivingProfile& profile,
                                     double eps, const MatrixXcd& frame0,
                                     const std::vector<double>& s_nodes,
                                     const FrameObserver& observer = {},
                                     const SchrodingerOptions& opts = {});

/// Provider of the parallel-transport generator at arbitrary phi.
class KProvider {
  public:
    virtual ~KProvider() = default;
    virtual int64_t dim() const = 0;
    /// Applier for K at this phi; valid until the next call.
    virtual std::function<VectorXcd(const VectorXcd&)> at_phi(double phi) = 0;
    virtual double norm_estimate() const = 0;
};

/// Dense K cached at Chebyshev-Lobatto nodes in phi and interpolated
/// barycentrically between rebuilds; node count is the rebuild-density knob.
class ChebyshevKProvider : public KProvider {
  public:
    ChebyshevKProvider(const HamiltonianFamily& family, const fock::SectorBasis& basis,
                       const quasiadiabatic::WeightFilter& filter, int nodes,
                       double phi_lo = 0.0, double phi_hi = kTwoPi);

    int64_t dim() const override { return dim_; }
    std::function<VectorXcd(const VectorXcd&)> at_phi(double phi) override;
    double norm_estimate() const override { return norm_est_; }

    /// Exact (non-interpolated) dense K at phi, for convergence probes.
    MatrixXcd exact_dense(double phi) const;

  private:
    const HamiltonianFamily* family_;
    const fock::SectorBasis* basis_;
    quasiadiabatic::WeightFilter filter_;
    double phi_lo_, phi_hi_;
    std::vector<double> nodes_;
    std::vector<MatrixXcd> k_nodes_;
    MatrixXcd k_interp_;
    int64_t dim_ = 0;
    double norm_est_ = 0.0;
};

struct ParallelOptions {
    double h_max = 0.01; // phi step
    double krylov_tol = 1e-11;
    int krylov_m = 20;
};

/// Parallel-transport flow d_phi psi = i K_phi psi, integrated in phi between
/// the requested nodes (the flow is reparametrization invariant, so s-grid
/// checkpoints are served by their phi images).
PropagationRun propagate_parallel(KProvider& k, const MatrixXcd& frame0,
                                  const std::vector<double>& phi_nodes,
                                  const FrameObserver& observer = {},
                                  const ParallelOptions& opts = {});

/// Binary frame checkpoint: int64 dim, int64 p, column-major complex doubles.
void write_frame(std::ostream& os, const MatrixXcd& frame);
MatrixXcd read_frame(std::istream& is);

double gram_defect(const MatrixXcd& frame);

} // namespace hallpump::evolution
