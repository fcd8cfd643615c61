#include "hallpump/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hallpump::config {

namespace pt = boost::property_tree;

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<double> parse_list(const std::string& s) {
    std::istringstream is(s);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    return out;
}

std::vector<std::string> parse_words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

std::string join_list(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
    return s;
}

std::string join_words(const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i];
    return s;
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw PreconditionError("cannot read config: " + std::string(e.what()));
    }
    ExperimentConfig c;
    c.L = tree.get("models.L", c.L);
    c.flux_p = tree.get("models.flux_p", c.flux_p);
    c.flux_q = tree.get("models.flux_q", c.flux_q);
    c.t = tree.get("models.t", c.t);
    c.V = tree.get("models.V", c.V);
    c.N = tree.get("models.N", c.N);

    c.p_rank = tree.get("spectral.p_rank", c.p_rank);
    c.snapshot_extra = tree.get("spectral.snapshot_extra", c.snapshot_extra);
    c.lanczos_tol = tree.get("spectral.lanczos_tol", c.lanczos_tol);
    c.lanczos_max_iter = tree.get("spectral.lanczos_max_iter", c.lanczos_max_iter);
    c.min_gap_abort = tree.get("spectral.min_gap_abort", c.min_gap_abort);
    c.gap_scan_points = tree.get("spectral.gap_scan_points", c.gap_scan_points);

    c.gamma = tree.get("quasiadiabatic.gamma", c.gamma);
    c.filter_kind = tree.get("quasiadiabatic.filter_kind", c.filter_kind);
    c.dense_dim_cap = tree.get("quasiadiabatic.dense_dim_cap", c.dense_dim_cap);
    c.cheb_nodes = tree.get("quasiadiabatic.cheb_nodes", c.cheb_nodes);
    c.cg_tol = tree.get("quasiadiabatic.cg_tol", c.cg_tol);

    c.profile = tree.get("evolution.profile", c.profile);
    c.krylov_tol = tree.get("evolution.krylov_tol", c.krylov_tol);
    c.krylov_m = tree.get("evolution.krylov_m", c.krylov_m);
    c.rad_per_step = tree.get("evolution.rad_per_step", c.rad_per_step);
    c.parallel_h_max = tree.get("evolution.parallel_h_max", c.parallel_h_max);
    c.run_dynamic_contract = tree.get("evolution.run_dynamic_contract", c.run_dynamic_contract);
    c.contract_tol = tree.get("evolution.contract_tol", c.contract_tol);
    c.contract_checkpoints = tree.get("evolution.contract_checkpoints", c.contract_checkpoints);

    if (auto s = tree.get_optional<std::string>("transport.eps_list"))
        c.eps_list = parse_list(*s);
    c.quad_intervals = tree.get("transport.quad_intervals", c.quad_intervals);
    c.rad_per_node = tree.get("transport.rad_per_node", c.rad_per_node);
    c.min_quad_intervals = tree.get("transport.min_quad_intervals", c.min_quad_intervals);
    c.fit_floor = tree.get("transport.fit_floor", c.fit_floor);

    c.run_index = tree.get("index.run_index", c.run_index);
    c.commutation_tol = tree.get("index.commutation_tol", c.commutation_tol);

    c.run_lr_cone = tree.get("lrdiag.run_lr_cone", c.run_lr_cone);
    c.lr_random_vectors = tree.get("lrdiag.lr_random_vectors", c.lr_random_vectors);
    c.lr_t_points = tree.get("lrdiag.lr_t_points", c.lr_t_points);
    c.lr_probes_per_distance = tree.get("lrdiag.lr_probes_per_distance", c.lr_probes_per_distance);

    c.out_dir = tree.get("cli.out_dir", c.out_dir);
    c.seed = tree.get("cli.seed", c.seed);
    c.threads = tree.get("cli.threads", c.threads);
    if (auto s = tree.get_optional<std::string>("cli.stages")) c.stages = parse_words(*s);
    return c;
}

void save_config(const ExperimentConfig& c, std::ostream& os) {
    os << "[models]\n";
    os << "L = " << c.L << "\n";
    os << "flux_p = " << c.flux_p << "\n";
    os << "flux_q = " << c.flux_q << "\n";
    os << "t = " << fmt(c.t) << "\n";
    os << "V = " << fmt(c.V) << "\n";
    os << "N = " << c.N << "\n\n";

    os << "[spectral]\n";
    os << "p_rank = " << c.p_rank << "\n";
    os << "snapshot_extra = " << c.snapshot_extra << "\n";
    os << "lanczos_tol = " << fmt(c.lanczos_tol) << "\n";
    os << "lanczos_max_iter = " << c.lanczos_max_iter << "\n";
    os << "min_gap_abort = " << fmt(c.min_gap_abort) << "\n";
    os << "gap_scan_points = " << c.gap_scan_points << "\n\n";

    os << "[quasiadiabatic]\n";
    os << "gamma = " << fmt(c.gamma) << "\n";
    os << "filter_kind = " << c.filter_kind << "\n";
    os << "dense_dim_cap = " << c.dense_dim_cap << "\n";
    os << "cheb_nodes = " << c.cheb_nodes << "\n";
    os << "cg_tol = " << fmt(c.cg_tol) << "\n\n";

    os << "[evolution]\n";
    os << "profile = " << c.profile << "\n";
    os << "krylov_tol = " << fmt(c.krylov_tol) << "\n";
    os << "krylov_m = " << c.krylov_m << "\n";
    os << "rad_per_step = " << fmt(c.rad_per_step) << "\n";
    os << "parallel_h_max = " << fmt(c.parallel_h_max) << "\n";
    os << "run_dynamic_contract = " << (c.run_dynamic_contract ? 1 : 0) << "\n";
    os << "contract_tol = " << fmt(c.contract_tol) << "\n";
    os << "contract_checkpoints = " << c.contract_checkpoints << "\n\n";

    os << "[transport]\n";
    os << "eps_list = " << join_list(c.eps_list) << "\n";
    os << "quad_intervals = " << c.quad_intervals << "\n";
    os << "rad_per_node = " << fmt(c.rad_per_node) << "\n";
    os << "min_quad_intervals = " << c.min_quad_intervals << "\n";
    os << "fit_floor = " << fmt(c.fit_floor) << "\n\n";

    os << "[index]\n";
    os << "run_index = " << (c.run_index ? 1 : 0) << "\n";
    os << "commutation_tol = " << fmt(c.commutation_tol) << "\n\n";

    os << "[lrdiag]\n";
    os << "run_lr_cone = " << (c.run_lr_cone ? 1 : 0) << "\n";
    os << "lr_random_vectors = " << c.lr_random_vectors << "\n";
    os << "lr_t_points = " << c.lr_t_points << "\n";
    os << "lr_probes_per_distance = " << c.lr_probes_per_distance << "\n\n";

    os << "[cli]\n";
    os << "out_dir = " << c.out_dir << "\n";
    os << "seed = " << c.seed << "\n";
    os << "threads = " << c.threads << "\n";
    os << "stages = " << join_words(c.stages) << "\n";
}

void save_config_file(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw PreconditionError("cannot write config file: " + path);
    save_config(cfg, os);
}

void validate_config(const ExperimentConfig& c) {
    if (c.L < 4 || c.L % 2 != 0)
        throw PreconditionError("models.L must be even and >= 4");
    if (c.flux_q <= 0) throw PreconditionError("models.flux_q must be positive");
    if ((static_cast<long long>(c.flux_p) * c.L * c.L) % c.flux_q != 0)
        throw PreconditionError("flux not realizable: L^2 p / q must be an integer");
    if (c.p_rank < 1) throw PreconditionError("spectral.p_rank must be >= 1");
    for (auto tol : {c.lanczos_tol, c.min_gap_abort, c.cg_tol, c.krylov_tol, c.fit_floor,
                     c.commutation_tol, c.rad_per_step, c.rad_per_node, c.parallel_h_max})
        if (tol <= 0.0) throw PreconditionError("all tolerances must be positive");
    if (c.eps_list.empty()) throw PreconditionError("transport.eps_list must not be empty");
    for (size_t i = 1; i < c.eps_list.size(); ++i)
        if (c.eps_list[i] >= c.eps_list[i - 1])
            throw PreconditionError("transport.eps_list must be sorted descending");
    for (double e : c.eps_list)
        if (e <= 0.0) throw PreconditionError("eps values must be positive");
    if (c.profile != "compliant" && c.profile != "ramp")
        throw PreconditionError("evolution.profile must be compliant or ramp");
    if (c.filter_kind != "bump" && c.filter_kind != "cubic")
        throw PreconditionError("quasiadiabatic.filter_kind must be bump or cubic");
    if (c.gap_scan_points < 2 || c.gap_scan_points % 2 == 0)
        throw PreconditionError("spectral.gap_scan_points must be odd and >= 3");
}

} // namespace hallpump::config
