#include "hallpump/quasiadiabatic.hpp"

#include <cmath>

namespace hallpump::quasiadiabatic {

WeightFilter::WeightFilter(double gamma, Kind kind) : gamma_(gamma), kind_(kind) {
    if (gamma <= 0.0) throw PreconditionError("filter gap parameter must be positive");
}

double WeightFilter::rho_hat(double omega) const {
    const double x = omega / gamma_;
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

cplx WeightFilter::w(double omega) const {
    if (omega == 0.0) return {0.0, 0.0};
    if (std::abs(omega) >= gamma_) return cplx{0.0, -1.0} / omega;
    if (kind_ == Kind::bump) return cplx{0.0, -(1.0 - rho_hat(omega))} / omega;
    // odd C^1 cubic matching -i/omega at |omega| = gamma
    const double g2 = gamma_ * gamma_;
    return cplx{0.0, -(2.0 * omega / g2 - omega * omega * omega / (g2 * g2))};
}

double WeightFilter::time_weight(double u) const {
    if (kind_ != Kind::bump)
        throw PreconditionError("time-domain weight is defined for the bump filter");
    if (u == 0.0) return 0.0;
    const double au = std::abs(u);
    // W(u>0) = -1/2 + (1/pi) int_0^gamma rho_hat(w) sin(w u)/w dw
    const int n = 512;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) { // midpoint rule; integrand smooth on (0, gamma)
        const double w = gamma_ * (i + 0.5) / n;
        acc += rho_hat(w) * std::sin(w * au) / w;
    }
    acc *= gamma_ / n / kPi;
    const double wpos = -0.5 + acc;
    return u > 0 ? wpos : -wpos;
}

void require_gap(const SpectralSnapshot& snap, const WeightFilter& f) {
    if (snap.gap < f.gamma())
        throw PreconditionError("snapshot gap " + std::to_string(snap.gap) +
                                " below filter gamma " + std::to_string(f.gamma()) +
                                "; filter invalid");
}

MatrixXcd build_K_dense(const DenseSpectrum& spec, const CsrMatrix& dh, const WeightFilter& f) {
    MatrixXcd m = kernels::csr_times_dense(dh, spec.vectors);
    MatrixXcd g = kernels::gemm(spec.vectors, m, true, false);
    MatrixXcd khat;
    kernels::filter_apply_omp(spec.values, g, [&f](double w) { return f.w(w); }, khat);
    MatrixXcd kv = kernels::gemm(spec.vectors, khat, false, false);
    return kernels::gemm(kv, spec.vectors, false, true);
}

EigenbasisOperator build_K_eigenbasis(const DenseSpectrum& spec, const CsrMatrix& dh,
                                      const WeightFilter& f) {
    EigenbasisOperator op;
    op.spec = &spec;
    MatrixXcd m = kernels::csr_times_dense(dh, spec.vectors);
    MatrixXcd g = kernels::gemm(spec.vectors, m, true, false);
    kernels::filter_apply_omp(spec.values, g, [&f](double w) { return f.w(w); }, op.k_hat);
    return op;
}

VectorXcd EigenbasisOperator::apply(const VectorXcd& psi) const {
    VectorXcd c = kernels::gemv(spec->vectors, psi, true);
    VectorXcd kc = kernels::gemv(k_hat, c, false);
    return kernels::gemv(spec->vectors, kc, false);
}

MatrixXcd build_K_quadrature(const DenseSpectrum& spec, const CsrMatrix& dh,
                             const WeightFilter& f, double u_max, int n_u) {
    MatrixXcd m = kernels::csr_times_dense(dh, spec.vectors);
    MatrixXcd g = kernels::gemm(spec.vectors, m, true, false);
    const int64_t n = spec.values.size();
    MatrixXcd khat = MatrixXcd::Zero(n, n);
    // trapezoid over the symmetric u-grid; W odd, so combine +-u into sines
    const double du = u_max / n_u;
    for (int j = 1; j <= n_u; ++j) {
        const double u = j * du;
        const double wu = f.time_weight(u) * ((j == n_u) ? 0.5 : 1.0) * du;
#pragma omp parallel for schedule(static)
        for (int64_t col = 0; col < n; ++col)
            for (int64_t row = 0; row < n; ++row) {
                const double om = spec.values[row] - spec.values[col];
                khat(row, col) += 2.0 * cplx{0.0, 1.0} * wu * std::sin(u * om) * g(row, col);
            }
    }
    MatrixXcd kv = kernels::gemm(spec.vectors, khat, false, false);
    return kernels::gemm(kv, spec.vectors, false, true);
}

ResolventK::ResolventK(const LinearOp& h, const SpectralSnapshot& snap, CsrMatrix dh,
                       const WeightFilter& f, double cg_tol, int cg_maxit)
    : h_(&h), snap_(&snap), dh_(std::move(dh)), filter_(f), cg_tol_(cg_tol), cg_maxit_(cg_maxit) {
    require_gap(snap, f);
    const int k = static_cast<int>(snap.low_values.size());
    const int p = snap.rank;
    const int ne = k - p;
    d_low_.resize(ne, ne);
    for (int n = 0; n < ne; ++n) {
        VectorXcd dv = kernels::matvec(dh_, snap.low_vectors.col(p + n));
        for (int m = 0; m < ne; ++m) d_low_(m, n) = kernels::dot(snap.low_vectors.col(p + m), dv);
    }
}

VectorXcd ResolventK::solve(const VectorXcd& rhs) const {
    const MatrixXcd& p = snap_->ground_vectors;
    auto deflate = [&](VectorXcd& v) { v -= p * (p.adjoint() * v); };

    VectorXcd b = rhs;
    deflate(b);
    const double bnorm = b.norm();
    VectorXcd x = VectorXcd::Zero(b.size());
    if (bnorm < 1e-300) return x;

    VectorXcd r = b, d = b, hd(b.size()), tmp;
    double rr = r.squaredNorm();
    for (int it = 0; it < cg_maxit_; ++it) {
        h_->apply(d, hd);
        hd -= snap_->ground_energy * d;
        deflate(hd);
        const double dAd = kernels::dot(d, hd).real();
        if (dAd <= 0.0) throw ConvergenceError("CG breakdown: operator not positive definite");
        const double alpha = rr / dAd;
        x += alpha * d;
        r -= alpha * hd;
        deflate(r);
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= cg_tol_ * bnorm) return x;
        d = r + (rr_new / rr) * d;
        rr = rr_new;
    }
    throw ConvergenceError("CG failed to converge in " + std::to_string(cg_maxit_) +
                           " iterations");
}

VectorXcd ResolventK::apply_ground_block(const VectorXcd& psi) const {
    const MatrixXcd& p = snap_->ground_vectors;
    VectorXcd xp = p * (p.adjoint() * psi);
    VectorXcd r = kernels::matvec(dh_, xp);
    return cplx{0.0, -1.0} * solve(r);
}

VectorXcd ResolventK::apply(const VectorXcd& psi) const {
    const MatrixXcd& p = snap_->ground_vectors;
    const int rank = snap_->rank;
    const int ne = static_cast<int>(snap_->low_values.size()) - rank;

    VectorXcd out = apply_ground_block(psi);

    // adjoint block: +i P dH (H-E0)^{-1} (1-P) psi
    VectorXcd perp = psi - p * (p.adjoint() * psi);
    if (perp.norm() > 1e-14) {
        VectorXcd x2 = solve(perp);
        VectorXcd dx = kernels::matvec(dh_, x2);
        out += cplx{0.0, 1.0} * (p * (p.adjoint() * dx));
    }

    // filter on the computed excited-low block
    if (ne > 0) {
        VectorXcd c(ne);
        for (int n = 0; n < ne; ++n) c[n] = kernels::dot(snap_->low_vectors.col(rank + n), psi);
        if (c.norm() > 1e-14) {
            VectorXcd y = VectorXcd::Zero(ne);
            for (int m = 0; m < ne; ++m)
                for (int n = 0; n < ne; ++n)
                    y[m] += filter_.w(snap_->low_values[rank + m] - snap_->low_values[rank + n]) *
                            d_low_(m, n) * c[n];
            out += snap_->low_vectors.rightCols(ne) * y;
        }
    }
    return out;
}

LocalityProfile locality_profile(const std::function<VectorXcd(const VectorXcd&)>& apply_k,
                                 double norm_k, const fock::SectorBasis& basis,
                                 const lattice::Region& region, int power_iters, uint64_t seed) {
    const auto& lat = basis.torus();
    const int64_t dim = static_cast<int64_t>(basis.dim());

    // per-site probe norms ||[K, 1 - 2 n_x]||
    std::vector<std::pair<int, double>> site_tails; // (distance to region, norm)
    int max_dist = 0;
    for (lattice::Site x : lat.sites()) {
        const int dist = lattice::distance_to_region(lat, x, region);
        if (dist == 0) continue;
        max_dist = std::max(max_dist, dist);
        const uint64_t bit = uint64_t{1} << lat.site_index(x);
        auto flip = [&](const VectorXcd& v) {
            VectorXcd o(dim);
            for (int64_t i = 0; i < dim; ++i)
                o[i] = (basis.state(i) & bit) ? -v[i] : v[i];
            return o;
        };
        auto comm = [&](const VectorXcd& v) { return apply_k(flip(v)) - flip(apply_k(v)); };
        const double nrm = kernels::spectral_norm_estimate(comm, dim, power_iters,
                                                           seed + lat.site_index(x));
        site_tails.push_back({dist, nrm});
    }

    LocalityProfile prof;
    const double scale = std::max(norm_k, 1e-300);
    for (int r = 0; r < max_dist; ++r) {
        double worst = 0.0;
        for (auto [dist, nrm] : site_tails)
            if (dist > r) worst = std::max(worst, nrm);
        prof.r.push_back(r);
        prof.relative_tail.push_back(worst / (2.0 * scale));
    }
    return prof;
}

TwistDerivativeSplit twist_derivative_split(const HamiltonianFamily& family,
                                            const lattice::Region& eta_minus,
                                            const lattice::Region& eta_plus) {
    // i [Q_eta, H] term-by-term, each term assigned to the boundary line its
    // support is nearest to (note the sign: d/dphi H~ = i[Q_eta, H]).
    const auto& lat = family.torus();
    auto comm = observables::boundary_commutator(lat, family.base(), family.strip());
    TwistDerivativeSplit split;
    for (auto& t : comm.terms) {
        for (auto& m : t.monomials) m.coeff *= cplx{0.0, -1.0}; // i[Q,Phi] = -i[Phi,Q]
        const auto sup = observables::support_region(lat, t.support);
        const int dm = lattice::region_distance(lat, sup, eta_minus);
        const int dp = lattice::region_distance(lat, sup, eta_plus);
        if (dm == dp)
            throw PreconditionError("twist derivative term equidistant from both cuts");
        if (dm < dp)
            split.minus_terms.push_back(std::move(t));
        else
            split.plus_terms.push_back(std::move(t));
    }
    return split;
}

} // namespace hallpump::quasiadiabatic
