#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hallpump/common.hpp"

namespace hallpump::kernels {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Compressed sparse row matrix over the sector basis.
struct CsrMatrix {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<int64_t> row_ptr; // size rows+1
    std::vector<int64_t> col;
    std::vector<cplx> val;

    int64_t nnz() const { return static_cast<int64_t>(val.size()); }
};

/// y = A x. The serial version is the reference implementation; the omp
/// version parallelizes over rows and produces bit-identical output for any
/// thread count (each row is summed sequentially by one thread).
void matvec_serial(const CsrMatrix& a, const cplx* x, cplx* y);
void matvec_omp(const CsrMatrix& a, const cplx* x, cplx* y);
VectorXcd matvec(const CsrMatrix& a, const VectorXcd& x);

/// y = A x for a diagonal operator stored as a real vector.
void diag_matvec_serial(const VectorXd& d, const cplx* x, cplx* y);
void diag_matvec_omp(const VectorXd& d, const cplx* x, cplx* y);

/// COO triplet accumulator -> CSR, combining duplicate entries.
struct CooBuilder {
    int64_t rows = 0, cols = 0;
    std::vector<int64_t> r, c;
    std::vector<cplx> v;
    void add(int64_t row, int64_t col_, cplx val) {
        r.push_back(row);
        c.push_back(col_);
        v.push_back(val);
    }
    CsrMatrix to_csr(double drop_tol = 0.0) const;
};

/// Frobenius-style checks and small helpers.
double csr_hermiticity_defect(const CsrMatrix& a);
CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b, cplx alpha = 1.0, cplx beta = 1.0);

/// Deterministic inner product (fixed summation order regardless of threads).
cplx dot(const VectorXcd& a, const VectorXcd& b);

/// Spectral norm estimate for Hermitian or anti-Hermitian operators, by
/// seeded power iteration on A^2.
double spectral_norm_estimate(const std::function<VectorXcd(const VectorXcd&)>& apply_a,
                              int64_t dim, int iters = 40, uint64_t seed = 12345);

/// Hermitian eigendecomposition via LAPACK zheevd. Columns of `vectors` are
/// eigenvectors, `values` ascending.
struct DenseSpectrum {
    VectorXd values;
    MatrixXcd vectors;
};
DenseSpectrum heig(const MatrixXcd& a);

/// Eigenvalues only (zheevd without vectors).
VectorXd heig_values(const MatrixXcd& a);

/// C = op(A) * op(B) via BLAS zgemm.
MatrixXcd gemm(const MatrixXcd& a, const MatrixXcd& b, bool adj_a = false, bool adj_b = false);

/// y = op(A) x via BLAS zgemv.
VectorXcd gemv(const MatrixXcd& a, const VectorXcd& x, bool adj_a = false);

/// B = A_sparse * D_dense, column-parallel.
MatrixXcd csr_times_dense(const CsrMatrix& a, const MatrixXcd& d);

/// Elementwise spectral-filter application in an eigenbasis:
/// out(m,n) = w(E_m - E_n) * in(m,n). Serial reference + omp variant.
void filter_apply_serial(const VectorXd& e, const MatrixXcd& in,
                         const std::function<cplx(double)>& w, MatrixXcd& out);
void filter_apply_omp(const VectorXd& e, const MatrixXcd& in,
                      const std::function<cplx(double)>& w, MatrixXcd& out);

/// Seeded normalized random complex vector (mt19937_64, standard normal).
VectorXcd random_vector(int64_t dim, uint64_t seed);

} // namespace hallpump::kernels
