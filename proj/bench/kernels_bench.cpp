// Benchmark of the OpenMP kernels against their serial reference
// implementations. Also asserts bit-identical outputs where the kernels are
// row-partitioned.

#include <chrono>
#include <cstdio>
#include <omp.h>

#include "hallpump/fock.hpp"
#include "hallpump/models.hpp"
#include "hallpump/observables.hpp"

using namespace hallpump;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

template <class F> double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, ms_since(t0));
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    int L = 6;
    if (argc > 1) L = std::atoi(argv[1]);

    auto lat = lattice::make_torus(L);
    auto regions = lattice::named_regions(lat);
    models::HofstadterParams params;
    params.L = L;
    params.flux_q = (L == 4) ? 4 : 12;
    params.V = 0.25;
    auto family = models::build_hofstadter(lat, regions, params);
    fock::SectorBasis basis(lat, models::band_state_count(params));

    std::printf("lattice L=%d, sector dim=%llu, threads=%d\n", L,
                static_cast<unsigned long long>(basis.dim()), omp_get_max_threads());

    auto t0 = std::chrono::steady_clock::now();
    auto h = observables::assemble(family.at_phi(0.3), basis);
    std::printf("%-28s %10.2f ms   (nnz=%lld)\n", "assemble (omp)", ms_since(t0),
                static_cast<long long>(h.nnz()));

    Eigen::VectorXcd x = kernels::random_vector(h.rows, 42);
    Eigen::VectorXcd y_serial(h.rows), y_omp(h.rows);

    const double t_serial =
        time_best_of(5, [&] { kernels::matvec_serial(h, x.data(), y_serial.data()); });
    const double t_omp = time_best_of(5, [&] { kernels::matvec_omp(h, x.data(), y_omp.data()); });
    const double dmax = (y_serial - y_omp).cwiseAbs().maxCoeff();
    std::printf("%-28s %10.3f ms\n", "matvec serial", t_serial);
    std::printf("%-28s %10.3f ms   speedup %.2fx, max|diff| %.1e %s\n", "matvec omp", t_omp,
                t_serial / t_omp, dmax, dmax == 0.0 ? "(bit-identical)" : "");

    Eigen::VectorXd q = fock::charge_operator(regions.nu, basis);
    Eigen::VectorXcd d_serial(h.rows), d_omp(h.rows);
    const double td_serial =
        time_best_of(5, [&] { kernels::diag_matvec_serial(q, x.data(), d_serial.data()); });
    const double td_omp =
        time_best_of(5, [&] { kernels::diag_matvec_omp(q, x.data(), d_omp.data()); });
    std::printf("%-28s %10.3f ms\n", "diag matvec serial", td_serial);
    std::printf("%-28s %10.3f ms   speedup %.2fx, max|diff| %.1e\n", "diag matvec omp", td_omp,
                td_serial / td_omp, (d_serial - d_omp).cwiseAbs().maxCoeff());

    // spectral filter application on a moderate dense block
    const int n = 900;
    Eigen::VectorXd e = Eigen::VectorXd::LinSpaced(n, -3.0, 3.0);
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Random(n, n);
    Eigen::MatrixXcd f_serial, f_omp;
    auto w = [](double om) { return std::abs(om) > 0.5 ? cplx{0.0, -1.0} / om : cplx{0.0, 0.0}; };
    const double tf_serial =
        time_best_of(3, [&] { kernels::filter_apply_serial(e, g, w, f_serial); });
    const double tf_omp = time_best_of(3, [&] { kernels::filter_apply_omp(e, g, w, f_omp); });
    std::printf("%-28s %10.3f ms\n", "filter apply serial (n=900)", tf_serial);
    std::printf("%-28s %10.3f ms   speedup %.2fx, max|diff| %.1e\n", "filter apply omp", tf_omp,
                tf_serial / tf_omp, (f_serial - f_omp).cwiseAbs().maxCoeff());
    return 0;
}
