#include "hallpump/transport.hpp"

#include <cmath>
#include <numeric>

namespace hallpump::transport {

using fock::SectorBasis;
using kernels::CsrMatrix;
using observables::LocalTerm;
using quasiadiabatic::ResolventK;
using spectral::LinearOp;
using spectral::SpectralSnapshot;

namespace {

double simpson_integrate(const std::vector<double>& values, double span) {
    const int intervals = static_cast<int>(values.size()) - 1;
    if (intervals < 2 || intervals % 2 != 0)
        throw PreconditionError("Simpson needs an even, positive interval count");
    const double h = span / intervals;
    double acc = values.front() + values.back();
    for (int i = 1; i < intervals; ++i) acc += values[i] * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// fine-vs-half-grid Simpson discrepancy as the quadrature error estimate
double quad_refinement_error(const std::vector<double>& values, double span, double scale) {
    std::vector<double> coarse;
    for (size_t i = 0; i < values.size(); i += 2) coarse.push_back(values[i]);
    if (coarse.size() < 3 || coarse.size() % 2 == 0) return 0.0;
    return std::abs(simpson_integrate(coarse, span) - simpson_integrate(values, span)) / scale;
}

int round_up_intervals(int n) {
    // multiple of 4 so the half grid is itself a Simpson grid
    return ((n + 3) / 4) * 4;
}

struct BondAssignment {
    std::vector<double> minus_fraction; // 1, 0, or 0.5 at equidistant ties
    std::vector<int> distance_to_cut_corner;
};

BondAssignment assign_bonds(const HamiltonianFamily& family, const NamedRegions& regions,
                            const std::vector<LocalTerm>& bond_terms) {
    const auto& lat = family.torus();
    BondAssignment out;
    const auto cut_corner = lattice::region_intersection(regions.nu_minus, family.cut_line());
    for (const auto& t : bond_terms) {
        const auto sup = observables::support_region(lat, t.support);
        const int dm = lattice::region_distance(lat, sup, regions.nu_minus);
        const int dp = lattice::region_distance(lat, sup, regions.nu_plus);
        double frac = 0.5;
        if (dm < dp) frac = 1.0;
        if (dm > dp) frac = 0.0;
        out.minus_fraction.push_back(frac);
        out.distance_to_cut_corner.push_back(
            cut_corner.empty() ? dm : lattice::region_distance(lat, sup, cut_corner));
    }
    return out;
}

} // namespace

ParallelTransportResult transported_charge_parallel_frames(
    const HamiltonianFamily& family, const fock::SectorBasis& basis, const NamedRegions& regions,
    const WeightFilter& filter, const std::vector<double>& phis,
    const std::vector<MatrixXcd>& frames, const TransportOptions& opts) {
    if (phis.size() != frames.size() || phis.size() < 3 || phis.size() % 2 == 0)
        throw PreconditionError("parallel transport quadrature needs an odd node count >= 3");

    const Eigen::VectorXd q_nu = fock::charge_operator(regions.nu, basis);
    ParallelTransportResult res;

    const size_t nn = phis.size();
    std::vector<double> node_minus(nn, 0.0), node_plus(nn, 0.0);
    std::vector<std::vector<double>> node_per_bond; // [node][bond]
    BondAssignment assign;
    bool assigned = false;

    MatrixXcd warm;
    for (size_t i = 0; i < nn; ++i) {
        const double phi = phis[i];
        CsrMatrix h = observables::assemble(family.at_phi(phi), basis);
        LinearOp op = spectral::csr_op(h);
        SpectralSnapshot snap = spectral::ground_snapshot(
            op, static_cast<int>(frames[i].cols()), opts.snapshot_extra, opts.lanczos,
            warm.cols() > 0 ? &warm : nullptr);
        warm = snap.low_vectors;
        res.min_gap_seen = std::min(res.min_gap_seen, snap.gap);
        quasiadiabatic::require_gap(snap, filter);

        const auto bonds = family.d_phi(phi).terms;
        if (!assigned) {
            assign = assign_bonds(family, regions, bonds);
            node_per_bond.assign(nn, std::vector<double>(bonds.size(), 0.0));
            assigned = true;
        }

        const int p = static_cast<int>(frames[i].cols());
        for (size_t b = 0; b < bonds.size(); ++b) {
            CsrMatrix dhb = observables::assemble_terms({bonds[b]}, basis);
            ResolventK kb(op, snap, std::move(dhb), filter, opts.cg_tol);
            double acc = 0.0;
            for (int col = 0; col < p; ++col) {
                const VectorXcd psi = frames[i].col(col);
                VectorXcd kpsi = kb.apply(psi);
                VectorXcd qpsi(psi.size());
                kernels::diag_matvec_omp(q_nu, psi.data(), qpsi.data());
                // <i[K_b, Q]> = -2 Im <K_b psi, Q psi>
                acc += -2.0 * kernels::dot(kpsi, qpsi).imag();
                // Hermiticity health: <psi|K|psi> must be real
                res.max_imag = std::max(res.max_imag,
                                        std::abs(kernels::dot(psi, kpsi).imag()));
            }
            acc /= p;
            node_per_bond[i][b] = acc;
            node_minus[i] += assign.minus_fraction[b] * acc;
            node_plus[i] += (1.0 - assign.minus_fraction[b]) * acc;
        }
    }

    const double span = phis.back() - phis.front();
    res.dq_minus = simpson_integrate(node_minus, span);
    res.dq_plus = simpson_integrate(node_plus, span);
    res.two_boundary_total = res.dq_minus + res.dq_plus;
    res.quad_error = quad_refinement_error(node_minus, span, 1.0);

    if (!node_per_bond.empty()) {
        const size_t nb = node_per_bond.front().size();
        std::vector<double> series(nn);
        for (size_t b = 0; b < nb; ++b) {
            for (size_t i = 0; i < nn; ++i) series[i] = node_per_bond[i][b];
            res.bond_contributions.push_back(
                {assign.distance_to_cut_corner[b], simpson_integrate(series, span)});
        }
    }
    return res;
}

ParallelTransportResult transported_charge_parallel(const HamiltonianFamily& family,
                                                    const fock::SectorBasis& basis,
                                                    const NamedRegions& regions,
                                                    const WeightFilter& filter, int p_rank,
                                                    const TransportOptions& opts) {
    const int intervals = round_up_intervals(opts.quad_intervals);
    const int n = intervals + 1;
    std::vector<double> phis(n);
    for (int i = 0; i < n; ++i) phis[i] = kTwoPi * i / intervals;

    // instantaneous ground frames stand in for the parallel-transported ones
    // (equal up to frame gauge, which the trace integrand ignores)
    std::vector<MatrixXcd> frames(n);
    MatrixXcd warm;
    for (int i = 0; i < n; ++i) {
        CsrMatrix h = observables::assemble(family.at_phi(phis[i]), basis);
        LinearOp op = spectral::csr_op(h);
        SpectralSnapshot snap = spectral::ground_snapshot(op, p_rank, opts.snapshot_extra,
                                                          opts.lanczos,
                                                          warm.cols() > 0 ? &warm : nullptr);
        warm = snap.low_vectors;
        frames[i] = snap.ground_vectors;
    }
    return transported_charge_parallel_frames(family, basis, regions, filter, phis, frames, opts);
}

EpsTransportResult transported_charge_eps(const HamiltonianFamily& family,
                                          const fock::SectorBasis& basis,
                                          const NamedRegions& regions,
                                          const DrivingProfile& profile, double eps,
                                          const MatrixXcd& frame0, const TransportOptions& opts) {
    TwistApplier h(family, basis);

    int intervals = std::max<int>(opts.min_quad_intervals,
                                  static_cast<int>(std::ceil(h.norm_estimate() /
                                                             (eps * opts.rad_per_node))));
    intervals = round_up_intervals(intervals);
    std::vector<double> s_nodes(intervals + 1);
    for (int i = 0; i <= intervals; ++i) s_nodes[i] = static_cast<double>(i) / intervals;

    const int p = static_cast<int>(frame0.cols());
    std::vector<double> node_minus(intervals + 1), node_plus(intervals + 1);
    double max_imag = 0.0;

    auto observer = [&](int idx, double /*s*/, double phi, const MatrixXcd& frame) {
        auto split = observables::current_decomposition(family.torus(), family.at_phi(phi),
                                                        regions.nu, regions.nu_minus,
                                                        regions.nu_plus);
        cplx jm{0.0, 0.0}, jp{0.0, 0.0};
        for (int col = 0; col < p; ++col) {
            jm += observables::terms_expectation(split.minus_terms, basis, frame.col(col));
            jp += observables::terms_expectation(split.plus_terms, basis, frame.col(col));
        }
        node_minus[idx] = jm.real() / p;
        node_plus[idx] = jp.real() / p;
        max_imag = std::max({max_imag, std::abs(jm.imag()) / p, std::abs(jp.imag()) / p});
    };

    auto run = evolution::propagate_schrodinger(h, profile, eps, frame0, s_nodes, observer,
                                                opts.stepper);

    EpsTransportResult res;
    res.eps = eps;
    res.diag = run.diag;
    res.max_imag = max_imag;
    res.dq_minus = simpson_integrate(node_minus, 1.0) / eps;
    res.dq_plus = simpson_integrate(node_plus, 1.0) / eps;
    res.quad_error = quad_refinement_error(node_minus, 1.0, eps);

    CsrMatrix h1 = observables::assemble(family.at_phi(kTwoPi), basis);
    LinearOp op1 = spectral::csr_op(h1);
    SpectralSnapshot snap1 = spectral::ground_snapshot(op1, p, opts.snapshot_extra, opts.lanczos);
    MatrixXcd ov = snap1.ground_vectors.adjoint() * run.final_frame;
    res.final_ground_overlap = (ov.adjoint() * ov).trace().real() / p;
    return res;
}

FitResult exactness_fit(const std::vector<double>& eps, const std::vector<double>& deviation,
                        double floor_abs, int min_points) {
    if (eps.size() != deviation.size() || eps.size() < 2)
        throw PreconditionError("fit needs matching eps/deviation lists");
    FitResult fit;
    fit.floor = floor_abs;

    std::vector<double> lx, ly;
    int lo = -1, hi = -1;
    for (size_t i = 0; i < eps.size(); ++i) {
        if (deviation[i] >= 10.0 * floor_abs && deviation[i] > 0.0) {
            if (lo < 0) lo = static_cast<int>(i);
            hi = static_cast<int>(i);
            lx.push_back(std::log(eps[i]));
            ly.push_back(std::log(deviation[i]));
        }
    }
    if (static_cast<int>(lx.size()) < min_points) {
        fit.floor_limited = true;
        return fit;
    }
    fit.window_lo = lo;
    fit.window_hi = hi;

    const double n = static_cast<double>(lx.size());
    const double sx = std::accumulate(lx.begin(), lx.end(), 0.0);
    const double sy = std::accumulate(ly.begin(), ly.end(), 0.0);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;

    double ss = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss += r * r;
    }
    if (lx.size() > 2)
        fit.slope_stderr = std::sqrt(ss / (n - 2) / (sxx - sx * sx / n));
    return fit;
}

} // namespace hallpump::transport
