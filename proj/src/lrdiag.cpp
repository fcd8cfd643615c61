#include "hallpump/lrdiag.hpp"

#include <algorithm>
#include <cmath>

namespace hallpump::lrdiag {

using evolution::expm_krylov;
using kernels::MatrixXcd;

namespace {

// O = n_x - 1/2 as a diagonal sign-free applier
struct DensityProbe {
    uint64_t bit;
    const fock::SectorBasis* basis;
    VectorXcd apply(const VectorXcd& v) const {
        VectorXcd o(v.size());
        for (int64_t i = 0; i < v.size(); ++i)
            o[i] = ((basis->state(i) & bit) ? 0.5 : -0.5) * v[i];
        return o;
    }
};

} // namespace

std::vector<double> default_t_grid(int L, double velocity, int points) {
    const double t_max = std::max(0.25, (L / 2.0 - 2.0) / std::max(velocity, 1e-9));
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) out[i] = t_max * (i + 1) / points;
    return out;
}

ConeProfile cone_scan(const LinearOp& gen, const fock::SectorBasis& basis, Site probe_site,
                      const std::vector<double>& t_grid, const std::vector<int>& d_grid,
                      const ConeOptions& opts) {
    const auto& lat = basis.torus();
    const int64_t dim = gen.dim;
    ConeProfile prof;
    prof.t_grid = t_grid;
    prof.d_grid = d_grid;
    prof.generator_class = opts.generalized ? "generalized" : "finite_range";

    DensityProbe ox{uint64_t{1} << lat.site_index(probe_site), &basis};

    // candidate probe sites per distance
    std::vector<std::vector<Site>> targets(d_grid.size());
    for (size_t di = 0; di < d_grid.size(); ++di) {
        for (Site y : lat.sites())
            if (lat.distance(probe_site, y) == d_grid[di]) targets[di].push_back(y);
        if (opts.probes_per_distance > 0 &&
            static_cast<int>(targets[di].size()) > opts.probes_per_distance)
            targets[di].resize(opts.probes_per_distance);
        if (targets[di].empty())
            throw PreconditionError("no sites at distance " + std::to_string(d_grid[di]));
    }

    // forward-evolved random vectors, advanced incrementally in t
    std::vector<VectorXcd> psi(opts.n_random), fwd(opts.n_random);
    for (int r = 0; r < opts.n_random; ++r) {
        psi[r] = kernels::random_vector(dim, opts.seed + 31 * r);
        fwd[r] = psi[r];
    }

    prof.c.assign(t_grid.size(), std::vector<double>(d_grid.size(), 0.0));
    double t_prev = 0.0;
    for (size_t ti = 0; ti < t_grid.size(); ++ti) {
        const double t = t_grid[ti];
        const double dt = t - t_prev;
        for (int r = 0; r < opts.n_random; ++r)
            fwd[r] = expm_krylov(gen, fwd[r], -dt, opts.krylov_tol, opts.krylov_m);
        t_prev = t;

        for (int r = 0; r < opts.n_random; ++r) {
            // tau_t(O_x) psi = e^{+itH} O_x e^{-itH} psi
            VectorXcd tau_psi =
                expm_krylov(gen, ox.apply(fwd[r]), t, opts.krylov_tol, opts.krylov_m);
            for (size_t di = 0; di < d_grid.size(); ++di) {
                for (Site y : targets[di]) {
                    DensityProbe oy{uint64_t{1} << lat.site_index(y), &basis};
                    VectorXcd oy_psi = oy.apply(psi[r]);
                    VectorXcd u = expm_krylov(gen, oy_psi, -t, opts.krylov_tol, opts.krylov_m);
                    VectorXcd tau_oy =
                        expm_krylov(gen, ox.apply(u), t, opts.krylov_tol, opts.krylov_m);
                    const double nrm = (tau_oy - oy.apply(tau_psi)).norm();
                    prof.c[ti][di] = std::max(prof.c[ti][di], nrm);
                }
            }
        }
        for (size_t di = 0; di < d_grid.size(); ++di) prof.peak = std::max(prof.peak, prof.c[ti][di]);
    }

    // cone-edge fit
    const double threshold = opts.threshold_frac * prof.peak;
    std::vector<double> ts, ds;
    int beyond_last = 0;
    for (size_t ti = 0; ti < t_grid.size(); ++ti) {
        int edge = 0;
        for (size_t di = 0; di < d_grid.size(); ++di)
            if (prof.c[ti][di] >= threshold) edge = std::max(edge, d_grid[di]);
        ts.push_back(t_grid[ti]);
        ds.push_back(edge);
        if (ti + 1 == t_grid.size())
            for (int d : d_grid)
                if (d > edge) ++beyond_last;
    }
    if (beyond_last < 4)
        throw PreconditionError("cone fit needs at least 4 distances past the cone edge");

    if (!opts.generalized) {
        // affine d* = v t + delta
        const double n = static_cast<double>(ts.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            sx += ts[i];
            sy += ds[i];
            sxx += ts[i] * ts[i];
            sxy += ts[i] * ds[i];
        }
        const double denom = n * sxx - sx * sx;
        prof.v_hat = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
        prof.cone_offset = (sy - prof.v_hat * sx) / n;
    } else {
        // d* = c t^alpha with alpha fixed
        double num = 0, den = 0;
        for (size_t i = 0; i < ts.size(); ++i) {
            const double ta = std::pow(ts[i], prof.power_alpha);
            num += ta * ds[i];
            den += ta * ta;
        }
        prof.power_coeff = den != 0.0 ? num / den : 0.0;
    }

    // tail classification at the largest time: convexity of log C beyond the edge
    {
        const size_t ti = t_grid.size() - 1;
        std::vector<double> logs;
        for (size_t di = 0; di < d_grid.size(); ++di)
            if (prof.c[ti][di] > 0.0 && prof.c[ti][di] < threshold)
                logs.push_back(std::log(prof.c[ti][di]));
        double convexity = 0.0;
        for (size_t i = 1; i + 1 < logs.size(); ++i)
            convexity += logs[i + 1] - 2.0 * logs[i] + logs[i - 1];
        prof.tail_class = convexity > 0.5 ? "slower_than_exponential" : "exponential";
    }
    return prof;
}

} // namespace hallpump::lrdiag
