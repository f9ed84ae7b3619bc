#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fraclat {

// One config file drives one command. Keys are `name = value` lines; unknown
// keys and violated preconditions are all collected before rejection.
struct RunConfig {
    std::string command;  // kernel resolvent saw thresholds mc verify-bounds eigen dynamics

    int d = 1;
    double alpha = 0.5;
    double s = 0.9;
    double mass = 1.0;
    int radius = 150;
    std::string method = "bochner";  // kernel route: bochner | fourier

    double disorder_width = 1.0;
    double lambda = 0.0;  // 0 = automatic 3 lambda0(s)
    double beta = -1.0;   // < 0 = automatic alpha_s
    double z_re = 0.5, z_im = 0.1;

    int box_l = 40;
    long n_samples = 1000;
    std::vector<int> distances{2, 4, 8, 16};

    int n_max = 4;
    int window = 0;  // 0 = automatic
    double gamma_fraction = 0.1;  // gamma rho_upper for saw commands

    double beta_dyn = 1.0;
    double t_max = 1000.0;
    int t_points = 25;
    int realizations = 3;

    uint64_t master_seed = 1;
    std::string output_dir = ".";
    std::string format = "csv";
    int threads = 0;  // 0 = library default; FRACLAT_THREADS overrides
};

// Parses and validates; throws ConfigInvalid carrying every violation.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Applies the config (including thread setup) and writes artifacts plus
// manifest.json into output_dir. Returns the process exit code: 0 success,
// 1 verification-report failure, 2 configuration or runtime error.
int run(const RunConfig& config);

}  // namespace fraclat
