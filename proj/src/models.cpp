#include "hallpump/models.hpp"

#include <cmath>

namespace hallpump::models {

using fock::FermiOp;
using fock::Monomial;
using lattice::Site;
using observables::LocalTerm;

int band_state_count(const HofstadterParams& p) {
    return (p.L * p.L) / p.flux_q;
}

namespace {

// Directed Peierls phase for the bond u -> v (nearest neighbors).
// Gauge: vertical bonds carry 2*pi*alpha*x1; horizontal bonds are real except
// the seam column (x1 = L/2 -> -L/2+1), which carries -2*pi*alpha*L*x2 so that
// every plaquette has flux 2*pi*alpha once alpha*L^2 is an integer.
double bond_phase(const TorusLattice& lat, double alpha, Site u, Site v) {
    const int L = lat.L();
    const int d1 = lat.canonical(v.x1 - u.x1);
    const int d2 = lat.canonical(v.x2 - u.x2);
    if (std::abs(d1) + std::abs(d2) != 1)
        throw PreconditionError("bond phase requested for non-neighbors");
    if (d1 == 0) {
        double th = kTwoPi * alpha * u.x1;
        return d2 == 1 ? th : -th;
    }
    // horizontal: phase only on the seam bond L/2 -> -L/2+1
    if (d1 == 1 && u.x1 == L / 2) return -kTwoPi * alpha * L * u.x2;
    if (d1 == -1 && v.x1 == L / 2) return kTwoPi * alpha * L * v.x2;
    return 0.0;
}

void check_params(const HofstadterParams& p) {
    if (p.flux_q <= 0 || p.flux_p < 0) throw PreconditionError("flux must be p/q with q > 0");
    if ((static_cast<long long>(p.flux_p) * p.L * p.L) % p.flux_q != 0)
        throw PreconditionError("flux p/q is not realizable: L^2 p/q must be an integer");
    if ((p.L * p.L) % p.flux_q != 0 && p.N < 0)
        throw PreconditionError("lowest-band filling undefined: q does not divide L^2");
}

} // namespace

MatrixXcd single_particle_matrix(const TorusLattice& lat, const HofstadterParams& p) {
    check_params(p);
    const double alpha = static_cast<double>(p.flux_p) / p.flux_q;
    const int n = lat.num_sites();
    MatrixXcd h = MatrixXcd::Zero(n, n);
    for (Site u : lat.sites()) {
        for (Site step : {Site{1, 0}, Site{0, 1}}) {
            Site v = lat.canonical({u.x1 + step.x1, u.x2 + step.x2});
            const double th = bond_phase(lat, alpha, u, v);
            const cplx amp = -p.t * std::polar(1.0, th);
            h(lat.site_index(v), lat.site_index(u)) += amp;
            h(lat.site_index(u), lat.site_index(v)) += std::conj(amp);
        }
    }
    return h;
}

double plaquette_defect(const TorusLattice& lat, const MatrixXcd& sp, double t, double flux) {
    // Product of normalized hopping phases around each elementary plaquette,
    // compared against exp(i*flux).
    double worst = 0.0;
    auto link = [&](Site a, Site b) { return sp(lat.site_index(b), lat.site_index(a)) / (-t); };
    for (Site u : lat.sites()) {
        Site r = lat.canonical({u.x1 + 1, u.x2});
        Site ur = lat.canonical({u.x1 + 1, u.x2 + 1});
        Site up = lat.canonical({u.x1, u.x2 + 1});
        cplx loop = link(u, r) * link(r, ur) * std::conj(link(up, ur)) * std::conj(link(u, up));
        worst = std::max(worst, std::abs(loop - std::polar(1.0, flux)));
    }
    return worst;
}

ExtensiveObservable hofstadter_observable(const TorusLattice& lat, const HofstadterParams& p) {
    check_params(p);
    const double alpha = static_cast<double>(p.flux_p) / p.flux_q;
    ExtensiveObservable obs;
    obs.range = 1;
    obs.strength = std::max(std::abs(p.t), std::abs(p.V));
    for (Site u : lat.sites()) {
        for (Site step : {Site{1, 0}, Site{0, 1}}) {
            Site v = lat.canonical({u.x1 + step.x1, u.x2 + step.x2});
            const int iu = lat.site_index(u), iv = lat.site_index(v);

            LocalTerm hop;
            hop.support = {std::min(iu, iv), std::max(iu, iv)};
            Monomial m;
            m.coeff = -p.t * std::polar(1.0, bond_phase(lat, alpha, u, v));
            m.factors = {{iu, false}, {iv, true}}; // a_u then a_v^*
            hop.monomials = {m, m.dagger()};
            obs.terms.push_back(std::move(hop));

            if (p.V != 0.0) {
                LocalTerm nn;
                nn.support = {std::min(iu, iv), std::max(iu, iv)};
                Monomial d; // V n_v n_u, factors in application order
                d.coeff = p.V;
                d.factors = {{iu, false}, {iu, true}, {iv, false}, {iv, true}};
                nn.monomials = {d};
                obs.terms.push_back(std::move(nn));
            }
        }
    }
    return obs;
}

HamiltonianFamily build_hofstadter(const TorusLattice& lat, const NamedRegions& regions,
                                   const HofstadterParams& p, bool cut_along_nu) {
    HofstadterParams q = p;
    if (q.N < 0) q.N = band_state_count(q);
    ExtensiveObservable obs = hofstadter_observable(lat, q);

    auto rep = observables::validate_extensive(lat, obs);
    if (!rep.ok)
        throw PreconditionError("hofstadter observable failed validation: " + rep.violations[0]);

    MatrixXcd sp = single_particle_matrix(lat, q);
    const double flux = kTwoPi * q.flux_p / q.flux_q;
    if (plaquette_defect(lat, sp, q.t, flux) > 1e-10)
        throw PreconditionError("inconsistent flux: plaquette products deviate from e^{i phi}");

    if (cut_along_nu) return HamiltonianFamily(lat, std::move(obs), regions.nu, regions.nu_minus);
    return HamiltonianFamily(lat, std::move(obs), regions.eta, regions.eta_minus);
}

BlochFn hofstadter_bloch(int flux_p, int flux_q, double t) {
    const double alpha = static_cast<double>(flux_p) / flux_q;
    const int q = flux_q;
    return [alpha, q, t](double th1, double th2) {
        MatrixXcd h = MatrixXcd::Zero(q, q);
        for (int j = 0; j < q; ++j) h(j, j) = -2.0 * t * std::cos(th2 + kTwoPi * alpha * j);
        for (int j = 0; j + 1 < q; ++j) {
            h(j + 1, j) += -t;
            h(j, j + 1) += -t;
        }
        h(0, q - 1) += -t * std::polar(1.0, th1);
        h(q - 1, 0) += -t * std::polar(1.0, -th1);
        return h;
    };
}

BlochFn trivial_insulator_bloch(double delta, double t) {
    return [delta, t](double th1, double th2) {
        MatrixXcd h(2, 2);
        const cplx f = -t * (1.0 + std::polar(1.0, -th1));
        h(0, 0) = delta - 2.0 * t * std::cos(th2);
        h(1, 1) = -delta - 2.0 * t * std::cos(th2);
        h(0, 1) = f;
        h(1, 0) = std::conj(f);
        return h;
    };
}

int chern_number(const BlochFn& bloch, int dim, int n_bands, int n_grid, double gap_floor) {
    if (n_bands <= 0 || n_bands > dim) throw PreconditionError("invalid band count");

    // Filled-band frames at every grid point.
    std::vector<MatrixXcd> frames(static_cast<size_t>(n_grid) * n_grid);
    for (int i = 0; i < n_grid; ++i)
        for (int j = 0; j < n_grid; ++j) {
            const double th1 = kTwoPi * i / n_grid;
            const double th2 = kTwoPi * j / n_grid;
            auto spec = kernels::heig(bloch(th1, th2));
            if (n_bands < dim) {
                const double gap = spec.values[n_bands] - spec.values[n_bands - 1];
                if (gap < gap_floor)
                    throw PreconditionError("band cluster gap closes on the Brillouin grid");
            }
            frames[i * n_grid + j] = spec.vectors.leftCols(n_bands);
        }

    auto link = [&](int ia, int ja, int ib, int jb) {
        const MatrixXcd o = frames[ia * n_grid + ja].adjoint() * frames[ib * n_grid + jb];
        cplx d = o.determinant();
        if (std::abs(d) < 1e-14)
            throw PreconditionError("singular link overlap; refine the Brillouin grid");
        return d / std::abs(d);
    };

    double total = 0.0;
    for (int i = 0; i < n_grid; ++i)
        for (int j = 0; j < n_grid; ++j) {
            const int i1 = (i + 1) % n_grid, j1 = (j + 1) % n_grid;
            const cplx u1 = link(i, j, i1, j);
            const cplx u2 = link(i1, j, i1, j1);
            const cplx u3 = link(i, j1, i1, j1);
            const cplx u4 = link(i, j, i, j1);
            // orientation chosen so the lowest 1/4-flux band reports -1
            total -= std::arg(u1 * u2 / u3 / u4);
        }
    const double c = total / kTwoPi;
    const int rounded = static_cast<int>(std::lround(c));
    if (std::abs(c - rounded) > 1e-6)
        throw ConvergenceError("field-strength sum is not an integer: " + std::to_string(c));
    return rounded;
}

} // namespace hallpump::models
