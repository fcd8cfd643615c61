#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "hallpump/kernels.hpp"

using namespace hallpump;
using namespace hallpump::kernels;

namespace {
CsrMatrix random_hermitian_csr(int64_t n, int nnz_per_row, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int64_t> col(0, n - 1);
    std::normal_distribution<double> val(0.0, 1.0);
    CooBuilder coo;
    coo.rows = coo.cols = n;
    for (int64_t i = 0; i < n; ++i)
        for (int k = 0; k < nnz_per_row; ++k) {
            int64_t j = col(rng);
            cplx v{val(rng), val(rng)};
            coo.add(i, j, v);
            coo.add(j, i, std::conj(v));
        }
    return coo.to_csr();
}
} // namespace

TEST_CASE("omp kernels are bit-identical to the serial reference") {
    auto a = random_hermitian_csr(3000, 6, 5);
    VectorXcd x = random_vector(3000, 7);
    VectorXcd ys(3000), yp(3000);
    matvec_serial(a, x.data(), ys.data());
    matvec_omp(a, x.data(), yp.data());
    CHECK((ys - yp).cwiseAbs().maxCoeff() == 0.0);

    VectorXd d = VectorXd::Random(3000);
    VectorXcd ds(3000), dp(3000);
    diag_matvec_serial(d, x.data(), ds.data());
    diag_matvec_omp(d, x.data(), dp.data());
    CHECK((ds - dp).cwiseAbs().maxCoeff() == 0.0);

    VectorXd e = VectorXd::LinSpaced(300, -2.0, 2.0);
    MatrixXcd g = MatrixXcd::Random(300, 300);
    auto w = [](double om) { return cplx{0.0, -om}; };
    MatrixXcd fs, fp;
    filter_apply_serial(e, g, w, fs);
    filter_apply_omp(e, g, w, fp);
    CHECK((fs - fp).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csr hermiticity defect") {
    auto a = random_hermitian_csr(200, 4, 9);
    CHECK(csr_hermiticity_defect(a) < 1e-15);
    a.val[3] += cplx{0.1, 0.0};
    CHECK(csr_hermiticity_defect(a) > 0.01);
}

TEST_CASE("csr add") {
    auto a = random_hermitian_csr(100, 3, 1);
    auto b = random_hermitian_csr(100, 3, 2);
    auto c = csr_add(a, b, 2.0, {0.0, 1.0});
    VectorXcd x = random_vector(100, 3);
    VectorXcd ya = matvec(a, x), yb = matvec(b, x), yc = matvec(c, x);
    CHECK((yc - (2.0 * ya + cplx{0.0, 1.0} * yb)).norm() < 1e-12);
}

TEST_CASE("heig matches Eigen's self-adjoint solver") {
    MatrixXcd m = MatrixXcd::Random(40, 40);
    MatrixXcd h = (m + m.adjoint()) / 2.0;
    auto spec = heig(h);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    CHECK((spec.values - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-11);
    // reconstruction
    MatrixXcd rec = spec.vectors * spec.values.asDiagonal() * spec.vectors.adjoint();
    CHECK((rec - h).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((heig_values(h) - es.eigenvalues()).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("gemm and gemv match Eigen") {
    MatrixXcd a = MatrixXcd::Random(23, 17);
    MatrixXcd b = MatrixXcd::Random(17, 31);
    CHECK((gemm(a, b) - a * b).cwiseAbs().maxCoeff() < 1e-12);
    MatrixXcd c = MatrixXcd::Random(23, 31);
    CHECK((gemm(a, c, true, false) - a.adjoint() * c).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((gemm(c, b, false, true) - c * b.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    VectorXcd x = random_vector(17, 21);
    CHECK((gemv(a, x) - a * x).norm() < 1e-12);
    VectorXcd y = random_vector(23, 22);
    CHECK((gemv(a, y, true) - a.adjoint() * y).norm() < 1e-12);

    MatrixXcd d = MatrixXcd::Random(23, 5);
    auto sp = random_hermitian_csr(23, 3, 77);
    CHECK((csr_times_dense(sp, d) - [&] {
              MatrixXcd out(23, 5);
              for (int i = 0; i < 5; ++i) out.col(i) = matvec(sp, d.col(i));
              return out;
          }()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("spectral norm estimate") {
    MatrixXcd m = MatrixXcd::Random(60, 60);
    MatrixXcd h = (m + m.adjoint()) / 2.0;
    auto apply = [&](const VectorXcd& v) { return (h * v).eval(); };
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    const double exact = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(spectral_norm_estimate(apply, 60, 80) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("deterministic dot and random vectors") {
    VectorXcd a = random_vector(500, 1), b = random_vector(500, 2);
    CHECK(dot(a, b) == dot(a, b));
    CHECK(random_vector(500, 1) == a);
    CHECK(std::abs(a.norm() - 1.0) < 1e-14);
}
