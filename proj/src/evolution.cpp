#include "hallpump/evolution.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <istream>
#include <ostream>

namespace hallpump::evolution {

namespace {
double bump(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return std::exp(-1.0 / (u * (1.0 - u)));
}
} // namespace

DrivingProfile::DrivingProfile(Kind kind) : kind_(kind) {
    if (kind_ != Kind::compliant) return;
    // cumulative integral of the bump on a uniform grid (composite Simpson
    // per cell with a midpoint refinement; the integrand is smooth)
    const int n = 4096;
    cumulative_.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double a = static_cast<double>(i) / n;
        const double b = static_cast<double>(i + 1) / n;
        const double mid = 0.5 * (a + b);
        cumulative_[i + 1] =
            cumulative_[i] + (b - a) / 6.0 * (bump(a) + 4.0 * bump(mid) + bump(b));
    }
    norm_ = cumulative_[n];
}

double DrivingProfile::phi(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return kTwoPi;
    if (kind_ == Kind::ramp) return kTwoPi * s;
    const int n = static_cast<int>(cumulative_.size()) - 1;
    const double x = s * n;
    const int i = std::min(static_cast<int>(x), n - 1);
    const double a = static_cast<double>(i) / n;
    const double b = static_cast<double>(i + 1) / n;
    // cubic Hermite on the cell, exact derivatives at the ends
    const double t = (x - i);
    const double h = b - a;
    const double p0 = cumulative_[i], p1 = cumulative_[i + 1];
    const double m0 = bump(a) * h, m1 = bump(b) * h;
    const double t2 = t * t, t3 = t2 * t;
    const double val = (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * m0 +
                       (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * m1;
    return kTwoPi * val / norm_;
}

double DrivingProfile::dphi(double s) const {
    if (kind_ == Kind::ramp) return kTwoPi;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return kTwoPi * bump(s) / norm_;
}

VectorXcd expm_krylov(const LinearOp& a, const VectorXcd& v, double tau, double tol, int m,
                      double* defect) {
    const double vnorm = v.norm();
    if (vnorm < 1e-300 || tau == 0.0) return v;

    VectorXcd cur = v;
    double remaining = tau;
    const double sign = tau >= 0 ? 1.0 : -1.0;
    int guard = 0;

    while (std::abs(remaining) > 1e-15 * std::abs(tau)) {
        if (++guard > 100000) throw ConvergenceError("expm_krylov: substep limit exceeded");
        const double cnorm = cur.norm();

        // Lanczos basis from cur
        const int mm = static_cast<int>(std::min<int64_t>(m, a.dim));
        MatrixXcd basis(cur.size(), mm);
        std::vector<double> alpha, beta;
        basis.col(0) = cur / cnorm;
        VectorXcd w(cur.size());
        int built = 0;
        bool breakdown = false;
        for (int j = 0; j < mm; ++j) {
            a.apply(basis.col(j), w);
            cplx aj = kernels::dot(basis.col(j), w);
            alpha.push_back(aj.real());
            w -= aj * basis.col(j);
            if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
            for (int pass = 0; pass < 2; ++pass)
                w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
            built = j + 1;
            const double b = w.norm();
            if (b < 1e-13 * (std::abs(aj) + 1.0)) { breakdown = true; break; }
            beta.push_back(b);
            if (j + 1 < mm) basis.col(j + 1) = w / b;
        }

        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(built, built);
        for (int i = 0; i < built; ++i) t(i, i) = alpha[i];
        for (int i = 0; i + 1 < built; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const Eigen::VectorXd theta = es.eigenvalues();
        const Eigen::MatrixXd s = es.eigenvectors();
        const Eigen::VectorXd s1 = s.row(0).transpose(); // S^T e_1

        auto krylov_exp = [&](double dt) {
            Eigen::VectorXcd y(built);
            for (int i = 0; i < built; ++i)
                y[i] = std::polar(1.0, dt * theta[i]) * s1[i];
            return (s.cast<cplx>() * y).eval();
        };

        double dt = remaining;
        if (!breakdown && beta.size() >= static_cast<size_t>(built)) {
            // error estimate: weight leaking past the last Krylov coordinate
            for (int halvings = 0; halvings < 60; ++halvings) {
                Eigen::VectorXcd y = krylov_exp(dt);
                const double est = beta[built - 1] * std::abs(y[built - 1]) * std::abs(dt);
                if (est <= tol * std::abs(dt) / std::abs(tau)) break;
                dt *= 0.5;
                if (std::abs(dt) < 1e-12 * std::abs(tau))
                    throw ConvergenceError("expm_krylov: step underflow");
            }
        }
        Eigen::VectorXcd y = krylov_exp(dt);
        cur = basis.leftCols(built) * (cnorm * y);
        remaining -= dt;
        if (std::abs(remaining) < 1e-14 * std::abs(tau)) remaining = 0.0;
    }
    (void)sign;

    if (defect) *defect = std::max(*defect, std::abs(cur.norm() - vnorm));
    return cur;
}

TwistApplier::TwistApplier(const HamiltonianFamily& family, const fock::SectorBasis& basis) {
    dim_ = static_cast<int64_t>(basis.dim());
    std::vector<observables::LocalTerm> base_terms;
    std::vector<observables::LocalTerm> phased_by_weight[9]; // weight in [-4, 4]

    for (const auto& t : family.base().terms) {
        if (!family.term_crosses_cut(t)) {
            base_terms.push_back(t);
            continue;
        }
        observables::LocalTerm neutral;
        neutral.support = t.support;
        for (const auto& m : t.monomials) {
            const int w = observables::charge_weight(m, family.torus(), family.strip());
            if (w == 0) {
                neutral.monomials.push_back(m);
            } else {
                if (std::abs(w) > 4) throw PreconditionError("unexpected charge weight");
                observables::LocalTerm single;
                single.support = t.support;
                single.monomials = {m};
                phased_by_weight[w + 4].push_back(std::move(single));
            }
        }
        if (!neutral.monomials.empty()) base_terms.push_back(std::move(neutral));
    }

    base_ = observables::assemble_terms(base_terms, basis);
    for (int w = -4; w <= 4; ++w) {
        if (w == 0 || phased_by_weight[w + 4].empty()) continue;
        phased_.push_back({observables::assemble_terms(phased_by_weight[w + 4], basis), w});
    }

    CsrMatrix h0 = observables::assemble(family.at_phi(0.0), basis);
    norm_est_ = kernels::spectral_norm_estimate(
        [&h0](const VectorXcd& x) { return kernels::matvec(h0, x); }, dim_, 30);
}

LinearOp TwistApplier::at_phi(double phi) const {
    return {dim_, [this, phi](const VectorXcd& x, VectorXcd& y) {
                y.resize(dim_);
                if (dim_ >= 2048)
                    kernels::matvec_omp(base_, x.data(), y.data());
                else
                    kernels::matvec_serial(base_, x.data(), y.data());
                scratch_.resize(dim_);
                for (const auto& part : phased_) {
                    if (dim_ >= 2048)
                        kernels::matvec_omp(part.mat, x.data(), scratch_.data());
                    else
                        kernels::matvec_serial(part.mat, x.data(), scratch_.data());
                    y += std::polar(1.0, phi * part.weight) * scratch_;
                }
            }};
}

double gram_defect(const MatrixXcd& frame) {
    MatrixXcd g = frame.adjoint() * frame;
    return (g - MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

namespace {
void check_frame(const MatrixXcd& frame) {
    if (gram_defect(frame) > 1e-8)
        throw PreconditionError("initial frame is not orthonormal");
}
} // namespace

PropagationRun propagate_schrodinger(const TwistApplier& h, const DrivingProfile& profile,
                                     double eps, const MatrixXcd& frame0,
                                     const std::vector<double>& s_nodes,
                                     const FrameObserver& observer,
                                     const SchrodingerOptions& opts) {
    if (eps <= 0.0) throw PreconditionError("adiabatic parameter must be positive");
    check_frame(frame0);

    PropagationRun run;
    run.eps = eps;
    run.s_nodes = s_nodes;
    MatrixXcd frame = frame0;

    const double h_cap = opts.rad_per_step * eps / std::max(h.norm_estimate(), 1e-12);

    double s = s_nodes.front();
    if (observer) observer(0, s, profile.phi(s), frame);
    for (size_t ni = 1; ni < s_nodes.size(); ++ni) {
        const double target = s_nodes[ni];
        const double span = target - s;
        if (span < 0) throw PreconditionError("s-nodes must be increasing");
        const int nsub = std::max(1, static_cast<int>(std::ceil(span / h_cap)));
        const double hs = span / nsub;
        if (hs > 0 && hs < opts.min_step)
            throw ConvergenceError("schrodinger stepper underflow: step " + std::to_string(hs));
        for (int k = 0; k < nsub; ++k) {
            const double mid = s + (k + 0.5) * hs;
            LinearOp op = h.at_phi(profile.phi(mid));
            for (int colv = 0; colv < frame.cols(); ++colv)
                frame.col(colv) = expm_krylov(op, frame.col(colv), -hs / eps, opts.krylov_tol,
                                              opts.krylov_m, &run.diag.max_unitarity_defect);
            ++run.diag.steps;
            run.diag.min_step = std::min(run.diag.min_step, hs);
        }
        s = target;
        run.phi_nodes.push_back(profile.phi(s));
        run.diag.max_gram_defect = std::max(run.diag.max_gram_defect, gram_defect(frame));
        if (observer) observer(static_cast<int>(ni), s, profile.phi(s), frame);
    }
    run.final_frame = frame;
    return run;
}

ChebyshevKProvider::ChebyshevKProvider(const HamiltonianFamily& family,
                                       const fock::SectorBasis& basis,
                                       const quasiadiabatic::WeightFilter& filter, int nodes,
                                       double phi_lo, double phi_hi)
    : family_(&family), basis_(&basis), filter_(filter), phi_lo_(phi_lo), phi_hi_(phi_hi) {
    if (nodes < 2) throw PreconditionError("need at least two Chebyshev nodes");
    dim_ = static_cast<int64_t>(basis.dim());
    nodes_.resize(nodes);
    k_nodes_.resize(nodes);
    for (int j = 0; j < nodes; ++j) {
        const double x = std::cos(kPi * j / (nodes - 1)); // Lobatto, 1 -> -1
        nodes_[j] = phi_lo_ + (phi_hi_ - phi_lo_) * 0.5 * (1.0 - x);
        k_nodes_[j] = exact_dense(nodes_[j]);
    }
    norm_est_ = kernels::spectral_norm_estimate(
        [this](const VectorXcd& v) { return kernels::gemv(k_nodes_[nodes_.size() / 2], v); },
        dim_, 30);
}

MatrixXcd ChebyshevKProvider::exact_dense(double phi) const {
    CsrMatrix h = observables::assemble(family_->at_phi(phi), *basis_);
    MatrixXcd hd = MatrixXcd::Zero(dim_, dim_);
    for (int64_t i = 0; i < h.rows; ++i)
        for (int64_t k = h.row_ptr[i]; k < h.row_ptr[i + 1]; ++k) hd(i, h.col[k]) = h.val[k];
    auto spec = kernels::heig(hd);
    CsrMatrix dh = observables::assemble(family_->d_phi(phi), *basis_);
    return quasiadiabatic::build_K_dense(spec, dh, filter_);
}

std::function<VectorXcd(const VectorXcd&)> ChebyshevKProvider::at_phi(double phi) {
    // barycentric Lagrange on Lobatto nodes
    const int n = static_cast<int>(nodes_.size());
    std::vector<double> lam(n);
    int exact_hit = -1;
    double denom = 0.0;
    for (int j = 0; j < n; ++j) {
        if (std::abs(phi - nodes_[j]) < 1e-14) { exact_hit = j; break; }
        double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
        if (j % 2 == 1) w = -w;
        lam[j] = w / (phi - nodes_[j]);
        denom += lam[j];
    }
    if (exact_hit >= 0) {
        k_interp_ = k_nodes_[exact_hit];
    } else {
        k_interp_.resize(dim_, dim_);
        k_interp_.setZero();
        for (int j = 0; j < n; ++j) k_interp_ += (lam[j] / denom) * k_nodes_[j];
    }
    return [this](const VectorXcd& v) { return kernels::gemv(k_interp_, v); };
}

PropagationRun propagate_parallel(KProvider& k, const MatrixXcd& frame0,
                                  const std::vector<double>& phi_nodes,
                                  const FrameObserver& observer, const ParallelOptions& opts) {
    check_frame(frame0);
    PropagationRun run;
    run.phi_nodes = phi_nodes;
    MatrixXcd frame = frame0;
    LinearOp op{k.dim(), nullptr};

    double phi = phi_nodes.front();
    if (observer) observer(0, phi / kTwoPi, phi, frame);
    for (size_t ni = 1; ni < phi_nodes.size(); ++ni) {
        const double target = phi_nodes[ni];
        const double span = target - phi;
        const int nsub = std::max(1, static_cast<int>(std::ceil(std::abs(span) / opts.h_max)));
        const double hs = span / nsub;
        for (int j = 0; j < nsub; ++j) {
            const double mid = phi + (j + 0.5) * hs;
            auto apply = k.at_phi(mid);
            op.apply = [&apply](const VectorXcd& x, VectorXcd& y) { y = apply(x); };
            for (int colv = 0; colv < frame.cols(); ++colv)
                frame.col(colv) = expm_krylov(op, frame.col(colv), hs, opts.krylov_tol,
                                              opts.krylov_m, &run.diag.max_unitarity_defect);
            ++run.diag.steps;
        }
        phi = target;
        run.diag.max_gram_defect = std::max(run.diag.max_gram_defect, gram_defect(frame));
        if (observer) observer(static_cast<int>(ni), phi / kTwoPi, phi, frame);
    }
    run.final_frame = frame;
    return run;
}

void write_frame(std::ostream& os, const MatrixXcd& frame) {
    const int64_t dim = frame.rows(), p = frame.cols();
    os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    os.write(reinterpret_cast<const char*>(&p), sizeof p);
    os.write(reinterpret_cast<const char*>(frame.data()),
             static_cast<std::streamsize>(sizeof(cplx) * dim * p));
}

MatrixXcd read_frame(std::istream& is) {
    int64_t dim = 0, p = 0;
    is.read(reinterpret_cast<char*>(&dim), sizeof dim);
    is.read(reinterpret_cast<char*>(&p), sizeof p);
    if (!is || dim <= 0 || p <= 0) throw PreconditionError("malformed frame checkpoint");
    MatrixXcd frame(dim, p);
    is.read(reinterpret_cast<char*>(frame.data()),
            static_cast<std::streamsize>(sizeof(cplx) * dim * p));
    if (!is) throw PreconditionError("truncated frame checkpoint");
    return frame;
}

} // namespace hallpump::evolution
