#include "hallpump/kernels.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include <cblas.h>
#include <lapacke.h>

namespace hallpump::kernels {

void matvec_serial(const CsrMatrix& a, const cplx* x, cplx* y) {
    for (int64_t i = 0; i < a.rows; ++i) {
        cplx acc{0.0, 0.0};
        for (int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) acc += a.val[k] * x[a.col[k]];
        y[i] = acc;
    }
}

void matvec_omp(const CsrMatrix& a, const cplx* x, cplx* y) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < a.rows; ++i) {
        cplx acc{0.0, 0.0};
        for (int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) acc += a.val[k] * x[a.col[k]];
        y[i] = acc;
    }
}

VectorXcd matvec(const CsrMatrix& a, const VectorXcd& x) {
    VectorXcd y(a.rows);
    if (a.rows >= 2048)
        matvec_omp(a, x.data(), y.data());
    else
        matvec_serial(a, x.data(), y.data());
    return y;
}

void diag_matvec_serial(const VectorXd& d, const cplx* x, cplx* y) {
    for (int64_t i = 0; i < d.size(); ++i) y[i] = d[i] * x[i];
}

void diag_matvec_omp(const VectorXd& d, const cplx* x, cplx* y) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < d.size(); ++i) y[i] = d[i] * x[i];
}

CsrMatrix CooBuilder::to_csr(double drop_tol) const {
    std::vector<int64_t> order(r.size());
    std::iota(order.begin(), order.end(), 0);
    // stable so duplicate (row, col) entries combine in insertion order
    std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
        if (r[a] != r[b]) return r[a] < r[b];
        return c[a] < c[b];
    });
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    for (size_t idx = 0; idx < order.size();) {
        const int64_t row = r[order[idx]], col_ = c[order[idx]];
        cplx acc{0.0, 0.0};
        while (idx < order.size() && r[order[idx]] == row && c[order[idx]] == col_)
            acc += v[order[idx++]];
        if (std::abs(acc) > drop_tol) {
            m.col.push_back(col_);
            m.val.push_back(acc);
            ++m.row_ptr[row + 1];
        }
    }
    for (int64_t i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

double csr_hermiticity_defect(const CsrMatrix& a) {
    // max |A_ij - conj(A_ji)| via a transposed lookup
    CooBuilder t;
    t.rows = a.cols;
    t.cols = a.rows;
    for (int64_t i = 0; i < a.rows; ++i)
        for (int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            t.add(a.col[k], i, std::conj(a.val[k]));
    CsrMatrix at = t.to_csr();
    double defect = 0.0;
    for (int64_t i = 0; i < a.rows; ++i) {
        int64_t ka = a.row_ptr[i], kb = at.row_ptr[i];
        while (ka < a.row_ptr[i + 1] || kb < at.row_ptr[i + 1]) {
            int64_t ca = ka < a.row_ptr[i + 1] ? a.col[ka] : a.cols;
            int64_t cb = kb < at.row_ptr[i + 1] ? at.col[kb] : a.cols;
            if (ca == cb) {
                defect = std::max(defect, std::abs(a.val[ka] - at.val[kb]));
                ++ka, ++kb;
            } else if (ca < cb) {
                defect = std::max(defect, std::abs(a.val[ka++]));
            } else {
                defect = std::max(defect, std::abs(at.val[kb++]));
            }
        }
    }
    return defect;
}

CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b, cplx alpha, cplx beta) {
    CooBuilder out;
    out.rows = a.rows;
    out.cols = a.cols;
    for (int64_t i = 0; i < a.rows; ++i)
        for (int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            out.add(i, a.col[k], alpha * a.val[k]);
    for (int64_t i = 0; i < b.rows; ++i)
        for (int64_t k = b.row_ptr[i]; k < b.row_ptr[i + 1]; ++k)
            out.add(i, b.col[k], beta * b.val[k]);
    return out.to_csr(1e-300);
}

cplx dot(const VectorXcd& a, const VectorXcd& b) {
    cplx acc{0.0, 0.0};
    for (int64_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double spectral_norm_estimate(const std::function<VectorXcd(const VectorXcd&)>& apply_a,
                              int64_t dim, int iters, uint64_t seed) {
    // power iteration on A^2; for (anti-)Hermitian A this is |lambda|_max^2,
    // monotone and free of the +-lambda oscillation of plain iteration
    VectorXcd v = random_vector(dim, seed);
    double norm2 = 0.0;
    for (int it = 0; it < iters; ++it) {
        VectorXcd w = apply_a(apply_a(v));
        norm2 = w.norm();
        if (norm2 < 1e-300) return 0.0;
        v = w / norm2;
    }
    return std::sqrt(norm2);
}

DenseSpectrum heig(const MatrixXcd& a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    DenseSpectrum out;
    out.vectors = a;
    out.values.resize(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                     reinterpret_cast<lapack_complex_double*>(out.vectors.data()),
                                     n, out.values.data());
    if (info != 0) throw ConvergenceError("zheevd failed, info=" + std::to_string(info));
    return out;
}

VectorXd heig_values(const MatrixXcd& a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    MatrixXcd work = a;
    VectorXd vals(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                     reinterpret_cast<lapack_complex_double*>(work.data()), n,
                                     vals.data());
    if (info != 0) throw ConvergenceError("zheevd failed, info=" + std::to_string(info));
    return vals;
}

MatrixXcd gemm(const MatrixXcd& a, const MatrixXcd& b, bool adj_a, bool adj_b) {
    const int m = static_cast<int>(adj_a ? a.cols() : a.rows());
    const int k = static_cast<int>(adj_a ? a.rows() : a.cols());
    const int n = static_cast<int>(adj_b ? b.rows() : b.cols());
    MatrixXcd c(m, n);
    const cplx one{1.0, 0.0}, zero{0.0, 0.0};
    cblas_zgemm(CblasColMajor, adj_a ? CblasConjTrans : CblasNoTrans,
                adj_b ? CblasConjTrans : CblasNoTrans, m, n, k, &one, a.data(),
                static_cast<int>(a.rows()), b.data(), static_cast<int>(b.rows()), &zero, c.data(),
                m);
    return c;
}

VectorXcd gemv(const MatrixXcd& a, const VectorXcd& x, bool adj_a) {
    VectorXcd y(adj_a ? a.cols() : a.rows());
    const cplx one{1.0, 0.0}, zero{0.0, 0.0};
    cblas_zgemv(CblasColMajor, adj_a ? CblasConjTrans : CblasNoTrans,
                static_cast<int>(a.rows()), static_cast<int>(a.cols()), &one, a.data(),
                static_cast<int>(a.rows()), x.data(), 1, &zero, y.data(), 1);
    return y;
}

MatrixXcd csr_times_dense(const CsrMatrix& a, const MatrixXcd& d) {
    MatrixXcd out(a.rows, d.cols());
#pragma omp parallel for schedule(static)
    for (int64_t c = 0; c < d.cols(); ++c) matvec_serial(a, d.col(c).data(), out.col(c).data());
    return out;
}

void filter_apply_serial(const VectorXd& e, const MatrixXcd& in,
                         const std::function<cplx(double)>& w, MatrixXcd& out) {
    const int64_t n = e.size();
    out.resize(n, n);
    for (int64_t j = 0; j < n; ++j)
        for (int64_t i = 0; i < n; ++i) out(i, j) = w(e[i] - e[j]) * in(i, j);
}

void filter_apply_omp(const VectorXd& e, const MatrixXcd& in,
                      const std::function<cplx(double)>& w, MatrixXcd& out) {
    const int64_t n = e.size();
    out.resize(n, n);
#pragma omp parallel for schedule(static)
    for (int64_t j = 0; j < n; ++j)
        for (int64_t i = 0; i < n; ++i) out(i, j) = w(e[i] - e[j]) * in(i, j);
}

VectorXcd random_vector(int64_t dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    VectorXcd v(dim);
    for (int64_t i = 0; i < dim; ++i) v[i] = cplx{gauss(rng), gauss(rng)};
    v.normalize();
    return v;
}

} // namespace hallpump::kernels
