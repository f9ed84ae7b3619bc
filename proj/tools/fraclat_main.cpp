#include <CLI11.hpp>

#include <cstdio>

#include "fraclat/config.hpp"
#include "fraclat/errors.hpp"
#include "fraclat/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fraclat: numerics for the fractional Laplacian, long-range "
                 "self-avoiding walks and the fractional Anderson model"};

    std::string config_path;
    std::string out_dir, format;
    uint64_t seed = 0;
    bool seed_set = false, out_set = false, format_set = false;
    int threads = -1;

    app.add_option("--config", config_path, "configuration file (key = value lines)")
        ->required();
    app.add_option("--seed", seed, "override the master seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--out", out_dir, "override the output directory")
        ->each([&](const std::string&) { out_set = true; });
    app.add_option("--format", format, "csv or json")->each([&](const std::string&) {
        format_set = true;
    });
    app.add_option("--threads", threads, "worker threads (FRACLAT_THREADS wins)");

    CLI11_PARSE(app, argc, argv);

    try {
        fraclat::RunConfig config = fraclat::parse_config(config_path);
        if (seed_set) config.master_seed = seed;
        if (out_set) config.output_dir = out_dir;
        if (format_set) config.format = format;
        if (threads >= 0) config.threads = threads;
        return fraclat::run(config);
    } catch (const fraclat::ConfigInvalid& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
