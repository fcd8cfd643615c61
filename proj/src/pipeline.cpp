#include "hallpump/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <omp.h>
#include <optional>

#include "hallpump/evolution.hpp"
#include "hallpump/index.hpp"
#include "hallpump/lrdiag.hpp"
#include "hallpump/models.hpp"
#include "hallpump/transport.hpp"

namespace hallpump::pipeline {

using config::ExperimentConfig;
using evolution::DrivingProfile;
using fock::SectorBasis;
using kernels::CsrMatrix;
using kernels::MatrixXcd;
using lattice::NamedRegions;
using lattice::TorusLattice;
using models::HofstadterParams;
using observables::HamiltonianFamily;
using quasiadiabatic::WeightFilter;

namespace {

HofstadterParams params_of(const ExperimentConfig& cfg) {
    HofstadterParams p;
    p.L = cfg.L;
    p.flux_p = cfg.flux_p;
    p.flux_q = cfg.flux_q;
    p.t = cfg.t;
    p.V = cfg.V;
    p.N = cfg.N;
    return p;
}

bool stage_enabled(const ExperimentConfig& cfg, const std::string& name) {
    return std::find(cfg.stages.begin(), cfg.stages.end(), name) != cfg.stages.end();
}

transport::TransportOptions transport_options(const ExperimentConfig& cfg) {
    transport::TransportOptions o;
    o.quad_intervals = cfg.quad_intervals;
    o.cg_tol = cfg.cg_tol;
    o.lanczos.tol = cfg.lanczos_tol;
    o.lanczos.max_iter = cfg.lanczos_max_iter;
    o.lanczos.seed = cfg.seed;
    o.snapshot_extra = cfg.snapshot_extra;
    o.rad_per_node = cfg.rad_per_node;
    o.min_quad_intervals = cfg.min_quad_intervals;
    o.stepper.krylov_tol = cfg.krylov_tol;
    o.stepper.krylov_m = cfg.krylov_m;
    o.stepper.rad_per_step = cfg.rad_per_step;
    return o;
}

} // namespace

int oracle_chern_number(const ExperimentConfig& cfg) {
    const int per_band = (cfg.L * cfg.L) / cfg.flux_q;
    const int n = cfg.N < 0 ? per_band : cfg.N;
    if (per_band <= 0 || n % per_band != 0)
        throw PreconditionError("oracle requires a filled band cluster: N must be a multiple of "
                                "L^2/q");
    const int n_bands = n / per_band;
    auto bloch = models::hofstadter_bloch(cfg.flux_p, cfg.flux_q, cfg.t);
    return models::chern_number(bloch, cfg.flux_q, n_bands, 32);
}

PipelineResult run_experiment(const ExperimentConfig& cfg) {
    config::validate_config(cfg);
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
    io::ensure_directory(cfg.out_dir);

    PipelineResult result;
    auto fail_stage = [&](const std::string& name, const std::string& why) {
        result.stages.push_back({name, false, why});
        result.exit_code = 2;
    };
    auto pass_stage = [&](const std::string& name) { result.stages.push_back({name, true, ""}); };
    auto add_check = [&](const std::string& name, double value, double threshold,
                         const std::string& dir) {
        io::SummaryCheck c;
        c.name = name;
        c.value = value;
        c.threshold = threshold;
        c.direction = dir;
        c.pass = dir == "le" ? (value <= threshold) : (value >= threshold);
        result.checks.push_back(c);
    };

    TorusLattice lat = lattice::make_torus(cfg.L);
    NamedRegions regions = lattice::named_regions(lat);
    HofstadterParams params = params_of(cfg);
    if (params.N < 0) params.N = models::band_state_count(params);

    std::optional<HamiltonianFamily> family;
    std::optional<SectorBasis> basis;
    double gamma = cfg.gamma;

    // ---- validate ----
    if (stage_enabled(cfg, "validate")) {
        try {
            family.emplace(models::build_hofstadter(lat, regions, params));
            basis.emplace(lat, params.N);
            auto rep = observables::validate_extensive(lat, family->base());
            if (!rep.ok) throw PreconditionError("interaction map invalid: " + rep.violations[0]);
            std::ofstream os(cfg.out_dir + "/interactions.txt", std::ios::binary);
            observables::write_interactions(os, lat, family->base());
            pass_stage("validate");
        } catch (const std::exception& e) {
            fail_stage("validate", e.what());
            io::write_summary(cfg.out_dir + "/summary.txt", result.checks);
            return result;
        }
    } else {
        family.emplace(models::build_hofstadter(lat, regions, params));
        basis.emplace(lat, params.N);
    }

    // ---- oracle (always cheap; used by later comparisons) ----
    try {
        result.oracle_chern = oracle_chern_number(cfg);
    } catch (const std::exception&) {
        result.oracle_chern = 0; // partial fillings have no oracle target
    }

    // ---- gap scan ----
    if (stage_enabled(cfg, "gapscan")) {
        try {
            std::vector<double> phis(cfg.gap_scan_points);
            for (int i = 0; i < cfg.gap_scan_points; ++i)
                phis[i] = kTwoPi * i / (cfg.gap_scan_points - 1);
            spectral::LanczosOptions lopts;
            lopts.tol = cfg.lanczos_tol;
            lopts.max_iter = cfg.lanczos_max_iter;
            lopts.seed = cfg.seed;
            auto scan = spectral::gap_scan(*family, *basis, phis, cfg.p_rank, cfg.min_gap_abort,
                                           lopts);
            result.min_gap = scan.min_gap;
            io::CsvWriter csv({"s", "phi", "E0", "E1", "gap", "p"});
            for (const auto& s : scan.snapshots)
                csv.add_row({s.s, s.phi, s.ground_energy, s.first_excited_energy, s.gap,
                             static_cast<double>(s.rank)});
            csv.write(cfg.out_dir + "/gap_scan.csv");
            add_check("gap_scan_min_gap", scan.min_gap, cfg.min_gap_abort, "ge");
            if (gamma <= 0.0) gamma = 0.9 * scan.min_gap;
            pass_stage("gapscan");
        } catch (const std::exception& e) {
            fail_stage("gapscan", e.what());
            io::write_summary(cfg.out_dir + "/summary.txt", result.checks);
            return result;
        }
    }
    if (gamma <= 0.0) gamma = 0.5; // stage skipped and no explicit value

    const WeightFilter filter(gamma, cfg.filter_kind == "bump" ? WeightFilter::Kind::bump
                                                               : WeightFilter::Kind::cubic);
    const int target = models::chern_transport_sign * result.oracle_chern;

    // ---- parallel transport ----
    double dq_par = 0.0;
    if (stage_enabled(cfg, "parallel")) {
        try {
            auto opts = transport_options(cfg);
            auto par = transport::transported_charge_parallel(*family, *basis, regions, filter,
                                                              cfg.p_rank, opts);
            dq_par = par.dq_minus;
            result.dq_parallel = dq_par;

            io::CsvWriter csv({"quantity", "value"});
            csv.add_row_mixed({"dq_parallel_minus", io::format_g17(par.dq_minus)});
            csv.add_row_mixed({"dq_parallel_plus", io::format_g17(par.dq_plus)});
            csv.add_row_mixed({"two_boundary_total", io::format_g17(par.two_boundary_total)});
            csv.add_row_mixed({"quad_error", io::format_g17(par.quad_error)});
            csv.add_row_mixed({"oracle_chern", std::to_string(result.oracle_chern)});
            csv.write(cfg.out_dir + "/parallel_transport.csv");

            io::CsvWriter loc({"distance_to_cut_corner", "contribution"});
            for (auto [d, v] : par.bond_contributions)
                loc.add_row({static_cast<double>(d), v});
            loc.write(cfg.out_dir + "/parallel_localization.csv");

            add_check("dq_par_integer_residual", std::abs(dq_par - std::round(dq_par)), 0.05,
                      "le");
            if (result.oracle_chern != 0)
                add_check("dq_par_oracle_match", std::abs(dq_par - target), 0.05, "le");
            add_check("dq_par_quad_refinement", par.quad_error, 1e-6, "le");
            add_check("dq_par_reality", par.max_imag, 1e-9, "le");
            pass_stage("parallel");
        } catch (const std::exception& e) {
            fail_stage("parallel", e.what());
        }
    }

    // ---- dynamic transport contract (dense K mode) ----
    if (stage_enabled(cfg, "parallel") && cfg.run_dynamic_contract &&
        static_cast<int64_t>(basis->dim()) <= cfg.dense_dim_cap) {
        try {
            evolution::ChebyshevKProvider kprov(*family, *basis, filter, cfg.cheb_nodes);
            DrivingProfile prof(cfg.profile == "ramp" ? DrivingProfile::Kind::ramp
                                                      : DrivingProfile::Kind::compliant);
            const int nchk = cfg.contract_checkpoints;
            std::vector<double> phi_nodes(nchk);
            for (int i = 0; i < nchk; ++i)
                phi_nodes[i] = prof.phi(static_cast<double>(i) / (nchk - 1));

            CsrMatrix h0 = observables::assemble(family->at_phi(0.0), *basis);
            auto op0 = spectral::csr_op(h0);
            spectral::LanczosOptions lopts;
            lopts.tol = cfg.lanczos_tol;
            lopts.seed = cfg.seed;
            auto snap0 = spectral::ground_snapshot(op0, cfg.p_rank, cfg.snapshot_extra, lopts);

            double worst = 0.0;
            double q_start = 0.0, q_end = 0.0;
            const Eigen::VectorXd q_nu = fock::charge_operator(regions.nu, *basis);
            MatrixXcd warm;
            auto observer = [&](int idx, double, double phi, const MatrixXcd& frame) {
                CsrMatrix h = observables::assemble(family->at_phi(phi), *basis);
                auto op = spectral::csr_op(h);
                auto snap = spectral::ground_snapshot(op, cfg.p_rank, cfg.snapshot_extra, lopts,
                                                      warm.cols() > 0 ? &warm : nullptr);
                warm = snap.low_vectors;
                worst = std::max(worst, spectral::projector_distance(frame,
                                                                    snap.ground_vectors));
                double q = 0.0;
                for (int c = 0; c < frame.cols(); ++c) {
                    Eigen::VectorXcd qpsi(frame.rows());
                    kernels::diag_matvec_omp(q_nu, frame.col(c).data(), qpsi.data());
                    q += kernels::dot(frame.col(c), qpsi).real();
                }
                q /= frame.cols();
                if (idx == 0) q_start = q;
                q_end = q;
            };
            evolution::ParallelOptions popts;
            popts.h_max = cfg.parallel_h_max;
            popts.krylov_tol = cfg.krylov_tol;
            auto run = evolution::propagate_parallel(kprov, snap0.ground_vectors, phi_nodes,
                                                     observer, popts);
            add_check("parallel_transport_contract", worst, cfg.contract_tol, "le");
            add_check("parallel_unitarity_defect", run.diag.max_unitarity_defect, 1e-9, "le");
            add_check("two_boundary_cancellation", std::abs(q_end - q_start), 1e-6, "le");
            pass_stage("contract");
        } catch (const std::exception& e) {
            fail_stage("contract", e.what());
        }
    }

    // ---- eps sweep ----
    if (stage_enabled(cfg, "sweep")) {
        try {
            DrivingProfile prof(cfg.profile == "ramp" ? DrivingProfile::Kind::ramp
                                                      : DrivingProfile::Kind::compliant);
            CsrMatrix h0 = observables::assemble(family->at_phi(0.0), *basis);
            auto op0 = spectral::csr_op(h0);
            spectral::LanczosOptions lopts;
            lopts.tol = cfg.lanczos_tol;
            lopts.seed = cfg.seed;
            auto snap0 = spectral::ground_snapshot(op0, cfg.p_rank, cfg.snapshot_extra, lopts);

            auto opts = transport_options(cfg);
            std::vector<double> devs, quad_errs;
            io::CsvWriter csv({"eps", "dq_eps", "dq_par", "deviation", "quad_error",
                               "final_ground_overlap", "unitarity_defect"});
            double max_imag = 0.0, max_unit = 0.0;
            for (double eps : cfg.eps_list) {
                auto r = transport::transported_charge_eps(*family, *basis, regions, prof, eps,
                                                           snap0.ground_vectors, opts);
                const double dev = std::abs(r.dq_minus - dq_par);
                devs.push_back(dev);
                quad_errs.push_back(r.quad_error);
                max_imag = std::max(max_imag, r.max_imag);
                max_unit = std::max(max_unit, r.diag.max_unitarity_defect);
                csv.add_row({eps, r.dq_minus, dq_par, dev, r.quad_error, r.final_ground_overlap,
                             r.diag.max_unitarity_defect});
            }
            csv.write(cfg.out_dir + "/eps_sweep.csv");

            auto fit = transport::exactness_fit(cfg.eps_list, devs, cfg.fit_floor);
            result.fit_slope = fit.slope;

            io::CsvWriter fcsv({"quantity", "value"});
            fcsv.add_row_mixed({"slope", io::format_g17(fit.slope)});
            fcsv.add_row_mixed({"slope_stderr", io::format_g17(fit.slope_stderr)});
            fcsv.add_row_mixed({"floor", io::format_g17(fit.floor)});
            fcsv.add_row_mixed({"window_lo", std::to_string(fit.window_lo)});
            fcsv.add_row_mixed({"window_hi", std::to_string(fit.window_hi)});
            fcsv.add_row_mixed({"floor_limited", fit.floor_limited ? "1" : "0"});
            fcsv.write(cfg.out_dir + "/exactness_fit.csv");

            io::SeriesPlot plot;
            plot.title = "charge transport deviation vs driving rate";
            plot.x_label = "eps";
            plot.y_label = "|dQ_eps - dQ_par|";
            plot.log_x = plot.log_y = true;
            io::SeriesPlot::Series s;
            s.name = cfg.profile;
            s.color = "rgb(200,60,40)";
            s.x = cfg.eps_list;
            s.y = devs;
            plot.series.push_back(s);
            plot.write(cfg.out_dir + "/eps_sweep.svg");

            if (!fit.floor_limited) {
                if (cfg.profile == "compliant")
                    add_check("exactness_slope", fit.slope, 3.0, "ge");
                else
                    add_check("exactness_slope_ramp", -fit.slope, -2.0, "ge");
            }
            add_check("eps_quad_refinement", *std::max_element(quad_errs.begin(),
                                                               quad_errs.end()), 1e-6, "le");
            add_check("eps_reality", max_imag, 1e-9, "le");
            add_check("eps_unitarity_defect", max_unit, 1e-9, "le");
            pass_stage("sweep");
        } catch (const std::exception& e) {
            fail_stage("sweep", e.what());
        }
    }

    // ---- index ----
    if (stage_enabled(cfg, "index") && cfg.run_index) {
        try {
            index::IndexOptions iopts;
            iopts.transport = transport_options(cfg);
            iopts.commutation_tol = cfg.commutation_tol;
            auto id = index::index_of(*family, *basis, regions, filter, cfg.p_rank,
                                      index::PathKind::identity, iopts);
            auto gp = index::index_of(*family, *basis, regions, filter, cfg.p_rank,
                                      index::PathKind::global_phase, iopts);
            auto par = index::index_of(*family, *basis, regions, filter, cfg.p_rank,
                                       index::PathKind::parallel_cycle, iopts);
            const double additivity = index::additivity_residual(
                *family, *basis, regions, filter, cfg.p_rank, index::PathKind::parallel_cycle,
                index::PathKind::parallel_cycle, iopts);
            auto rev = index::index_over_legs(
                *family, *basis, regions, filter, cfg.p_rank,
                {{0.0, kTwoPi}, {kTwoPi, 0.0}}, iopts);

            io::CsvWriter csv({"unitary", "index", "nearest_int_residual", "commutation_defect"});
            csv.add_row_mixed({"identity", io::format_g17(id.value),
                               io::format_g17(id.nearest_int_residual), "0"});
            csv.add_row_mixed({"global_phase", io::format_g17(gp.value),
                               io::format_g17(gp.nearest_int_residual), "0"});
            csv.add_row_mixed({"parallel_cycle", io::format_g17(par.value),
                               io::format_g17(par.nearest_int_residual),
                               io::format_g17(par.commutation_defect)});
            csv.add_row_mixed({"forward_then_reversed", io::format_g17(rev.value),
                               io::format_g17(rev.nearest_int_residual),
                               io::format_g17(rev.commutation_defect)});
            csv.write(cfg.out_dir + "/index.csv");

            add_check("index_identity", std::abs(id.value), 0.0, "le");
            add_check("index_residual", par.nearest_int_residual, 0.05, "le");
            add_check("index_additivity", additivity, 0.05, "le");
            add_check("index_reversal", std::abs(rev.value), 0.05, "le");
            pass_stage("index");
        } catch (const std::exception& e) {
            fail_stage("index", e.what());
        }
    }

    // ---- LR cone ----
    if (stage_enabled(cfg, "lrcone") && cfg.run_lr_cone) {
        try {
            CsrMatrix h0 = observables::assemble(family->at_phi(0.0), *basis);
            auto op = spectral::csr_op(h0);
            lrdiag::ConeOptions copts;
            copts.n_random = cfg.lr_random_vectors;
            copts.seed = cfg.seed + 5;
            copts.probes_per_distance = cfg.lr_probes_per_distance;
            auto tgrid = lrdiag::default_t_grid(cfg.L, copts.wraparound_velocity,
                                                cfg.lr_t_points);
            std::vector<int> dgrid;
            for (int d = 1; d <= cfg.L; ++d) dgrid.push_back(d);
            auto prof = lrdiag::cone_scan(op, *basis, {0, 0}, tgrid, dgrid, copts);

            io::CsvWriter csv({"t", "d", "c"});
            for (size_t ti = 0; ti < prof.t_grid.size(); ++ti)
                for (size_t di = 0; di < prof.d_grid.size(); ++di)
                    csv.add_row({prof.t_grid[ti], static_cast<double>(prof.d_grid[di]),
                                 prof.c[ti][di]});
            csv.write(cfg.out_dir + "/lr_cone.csv");

            io::HeatmapPlot heat;
            heat.title = "commutator light cone";
            heat.x_label = "distance";
            heat.y_label = "time";
            heat.x.assign(prof.d_grid.begin(), prof.d_grid.end());
            heat.y = prof.t_grid;
            heat.values = prof.c;
            heat.write(cfg.out_dir + "/lr_cone.svg");

            // outside-cone suppression at d >= v t + 3
            double worst = 0.0;
            for (size_t ti = 0; ti < prof.t_grid.size(); ++ti)
                for (size_t di = 0; di < prof.d_grid.size(); ++di)
                    if (prof.d_grid[di] >= prof.v_hat * prof.t_grid[ti] + 3.0)
                        worst = std::max(worst, prof.c[ti][di] / prof.peak);
            add_check("lr_outside_cone_fraction", worst, 1e-3, "le");
            pass_stage("lrcone");
        } catch (const std::exception& e) {
            fail_stage("lrcone", e.what());
        }
    }

    for (const auto& c : result.checks)
        if (!c.pass) result.exit_code = std::max(result.exit_code, 1);
    io::write_summary(cfg.out_dir + "/summary.txt", result.checks);

    io::CsvWriter stage_csv({"stage", "ok", "diagnostic"});
    for (const auto& s : result.stages)
        stage_csv.add_row_mixed({s.stage, s.ok ? "1" : "0", s.diagnostic});
    stage_csv.write(cfg.out_dir + "/stages.csv");
    return result;
}

} // namespace hallpump::pipeline
