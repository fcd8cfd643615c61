#include "hallpump/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

namespace hallpump::spectral {

LinearOp csr_op(const CsrMatrix& a) {
    return {a.rows, [&a](const VectorXcd& x, VectorXcd& y) {
                y.resize(a.rows);
                if (a.rows >= 2048)
                    kernels::matvec_omp(a, x.data(), y.data());
                else
                    kernels::matvec_serial(a, x.data(), y.data());
            }};
}

namespace {

void orthogonalize_against(VectorXcd& v, const MatrixXcd& q) {
    if (q.cols() == 0) return;
    // two passes of classical Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) v -= q * (q.adjoint() * v);
}

// Single lowest eigenpair of op restricted orthogonal to `deflate`.
bool lanczos_lowest(const LinearOp& op, const MatrixXcd& deflate, const LanczosOptions& opts,
                    const VectorXcd& start, double& value, VectorXcd& vector, double& residual) {
    const int64_t n = op.dim;
    const int m_max = static_cast<int>(std::min<int64_t>(opts.max_iter, n));

    MatrixXcd basis(n, m_max);
    std::vector<double> alpha, beta;
    VectorXcd v = start;
    orthogonalize_against(v, deflate);
    if (v.norm() < 1e-12) return false;
    v.normalize();
    basis.col(0) = v;

    VectorXcd w(n);
    double scale = 1.0;
    for (int j = 0; j < m_max; ++j) {
        op.apply(basis.col(j), w);
        cplx a = kernels::dot(basis.col(j), w);
        alpha.push_back(a.real());
        w -= a * basis.col(j);
        if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
        orthogonalize_against(w, deflate);
        // full reorthogonalization against the Krylov basis
        for (int pass = 0; pass < 2; ++pass)
            w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);

        const double b = w.norm();
        scale = std::max(scale, std::abs(alpha[j]) + (j > 0 ? beta[j - 1] : 0.0) + b);

        // Ritz values of the tridiagonal
        const int m = j + 1;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) t(i, i) = alpha[i];
        for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const double theta = es.eigenvalues()[0];
        const double bottom_coeff = std::abs(es.eigenvectors().col(0)[m - 1]);
        const double res_est = b * bottom_coeff;

        if (res_est <= opts.tol * scale || b < 1e-14 * scale || m == m_max) {
            vector = basis.leftCols(m) * es.eigenvectors().col(0).cast<cplx>();
            orthogonalize_against(vector, deflate);
            const double nr = vector.norm();
            if (nr < 1e-10) return false;
            vector /= nr;
            op.apply(vector, w);
            value = kernels::dot(vector, w).real();
            residual = (w - value * vector).norm();
            return residual <= 100.0 * opts.tol * scale || b < 1e-14 * scale;
        }
        beta.push_back(b);
        basis.col(j + 1) = w / b;
    }
    return false;
}

} // namespace

EigenPairs lowest_eigenpairs(const LinearOp& op, int k, const LanczosOptions& opts,
                             const MatrixXcd* warm_start) {
    EigenPairs out;
    out.values.resize(k);
    out.residuals.resize(k);
    out.vectors.resize(op.dim, k);

    MatrixXcd found(op.dim, 0);
    for (int i = 0; i < k; ++i) {
        VectorXcd start;
        if (warm_start && i < warm_start->cols() && warm_start->rows() == op.dim)
            start = warm_start->col(i);
        else
            start = kernels::random_vector(op.dim, opts.seed + 1000 * i);

        double value = 0.0, residual = 0.0;
        VectorXcd vec;
        bool ok = lanczos_lowest(op, found, opts, start, value, vec, residual);
        if (!ok) {
            // retry once from a fresh random start before giving up
            start = kernels::random_vector(op.dim, opts.seed + 1000 * i + 17);
            ok = lanczos_lowest(op, found, opts, start, value, vec, residual);
        }
        if (!ok) throw ConvergenceError("Lanczos failed to converge for eigenpair " +
                                        std::to_string(i));
        out.values[i] = value;
        out.residuals[i] = residual;
        out.vectors.col(i) = vec;
        found.conservativeResize(op.dim, i + 1);
        found.col(i) = vec;
    }

    // deflation returns them nearly sorted; enforce order
    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return out.values[a] < out.values[b]; });
    EigenPairs sorted;
    sorted.values.resize(k);
    sorted.residuals.resize(k);
    sorted.vectors.resize(op.dim, k);
    for (int i = 0; i < k; ++i) {
        sorted.values[i] = out.values[order[i]];
        sorted.residuals[i] = out.residuals[order[i]];
        sorted.vectors.col(i) = out.vectors.col(order[i]);
    }
    return sorted;
}

SpectralSnapshot ground_snapshot(const LinearOp& op, int p_expected, int extra,
                                 const LanczosOptions& opts, const MatrixXcd* warm_start,
                                 double degeneracy_tol) {
    if (p_expected < 1) throw PreconditionError("expected ground-space rank must be >= 1");
    const int k = std::min<int64_t>(p_expected + std::max(extra, 2), op.dim);
    EigenPairs pairs = lowest_eigenpairs(op, k, opts, warm_start);

    SpectralSnapshot snap;
    snap.rank = p_expected;
    snap.low_values = pairs.values;
    snap.low_vectors = pairs.vectors;
    snap.ground_energy = pairs.values[0];
    snap.first_excited_energy = pairs.values[p_expected];
    snap.gap = pairs.values[p_expected] - pairs.values[p_expected - 1];
    snap.degeneracy_ambiguous = snap.gap < degeneracy_tol;
    snap.ground_vectors = pairs.vectors.leftCols(p_expected);
    snap.max_residual = pairs.residuals.maxCoeff();
    return snap;
}

GapScan gap_scan(const observables::HamiltonianFamily& family, const fock::SectorBasis& basis,
                 const std::vector<double>& phis, int p_expected, double min_gap_abort,
                 const LanczosOptions& opts) {
    GapScan scan;
    scan.min_gap = std::numeric_limits<double>::max();
    MatrixXcd warm;
    for (double phi : phis) {
        CsrMatrix h = observables::assemble(family.at_phi(phi), basis);
        LinearOp op = csr_op(h);
        SpectralSnapshot snap =
            ground_snapshot(op, p_expected, 4, opts, warm.cols() > 0 ? &warm : nullptr);
        snap.phi = phi;
        snap.s = phi / kTwoPi;
        warm = snap.low_vectors;
        scan.min_gap = std::min(scan.min_gap, snap.gap);
        if (snap.degeneracy_ambiguous) scan.rank_constant = false;
        scan.snapshots.push_back(std::move(snap));
        if (scan.snapshots.back().gap < min_gap_abort)
            throw ConvergenceError(
                "gap scan aborted: gap " + std::to_string(scan.snapshots.back().gap) +
                " below threshold " + std::to_string(min_gap_abort) + " at phi=" +
                std::to_string(phi));
    }
    return scan;
}

double projector_distance(const MatrixXcd& a, const MatrixXcd& b) {
    if (a.cols() != b.cols()) return 1.0;
    // equal-rank orthonormal frames: ||P_A - P_B|| = max principal sine,
    // obtained from the smallest singular value of the p x p overlap
    MatrixXcd ov = a.adjoint() * b;
    Eigen::JacobiSVD<MatrixXcd> svd(ov);
    const double smin = svd.singularValues().minCoeff();
    return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

} // namespace hallpump::spectral
