#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hallpump/common.hpp"

namespace hallpump::config {

/// Full experiment description. One INI-style text file, sections mirroring
/// the module layout; no environment-variable configuration. Serialization
/// round-trips bit-exactly (doubles printed with 17 significant digits).
struct ExperimentConfig {
    // [models]
    int L = 4;
    int flux_p = 1;
    int flux_q = 4;
    double t = 1.0;
    double V = 0.0;
    int N = -1; // -1 = lowest-band filling

    // [spectral]
    int p_rank = 1;
    int snapshot_extra = 4;
    double lanczos_tol = 1e-12;
    int lanczos_max_iter = 600;
    double min_gap_abort = 0.05;
    int gap_scan_points = 17;

    // [quasiadiabatic]
    double gamma = 0.0; // 0 = auto: 0.9 * min scanned gap
    std::string filter_kind = "bump"; // bump | cubic
    int dense_dim_cap = 2500;
    int cheb_nodes = 17;
    double cg_tol = 1e-11;

    // [evolution]
    std::string profile = "compliant"; // compliant | ramp
    double krylov_tol = 1e-11;
    int krylov_m = 28;
    double rad_per_step = 1.5;
    double parallel_h_max = 0.01;
    bool run_dynamic_contract = true; // K-generated flow vs P_phi (dense mode only)
    double contract_tol = 1e-4;
    int contract_checkpoints = 33;

    // [transport]
    std::vector<double> eps_list = {0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025};
    int quad_intervals = 64;
    double rad_per_node = 0.35;
    int min_quad_intervals = 128;
    double fit_floor = 3e-7;

    // [index]
    bool run_index = true;
    double commutation_tol = 1e-6;

    // [lrdiag]
    bool run_lr_cone = false;
    int lr_random_vectors = 12;
    int lr_t_points = 4;
    int lr_probes_per_distance = 0;

    // [cli]
    std::string out_dir = "out";
    uint64_t seed = 1;
    int threads = 0; // 0 = library default
    std::vector<std::string> stages = {"validate", "gapscan", "parallel", "sweep", "index"};
};

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, std::ostream& os);
void save_config_file(const ExperimentConfig& cfg, const std::string& path);

/// Structural checks (parity of L, sorted eps, positive tolerances...).
/// Throws PreconditionError with the first problem found.
void validate_config(const ExperimentConfig& cfg);

} // namespace hallpump::config
