#include "fraclat/config.hpp"

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fraclat/anderson.hpp"
#include "fraclat/errors.hpp"
#include "fraclat/io.hpp"
#include "fraclat/resolvent.hpp"

namespace fraclat {

namespace {

const char* kCommands[] = {"kernel", "resolvent", "saw",   "thresholds",
                           "mc",     "verify-bounds", "eigen", "dynamics"};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    std::vector<std::string> violations;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            violations.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "command") c.command = val;
            else if (key == "d") c.d = std::stoi(val);
            else if (key == "alpha") c.alpha = std::stod(val);
            else if (key == "s") c.s = std::stod(val);
            else if (key == "mass") c.mass = std::stod(val);
            else if (key == "radius") c.radius = std::stoi(val);
            else if (key == "method") c.method = val;
            else if (key == "disorder_width") c.disorder_width = std::stod(val);
            else if (key == "lambda") c.lambda = std::stod(val);
            else if (key == "beta") c.beta = std::stod(val);
            else if (key == "z_re") c.z_re = std::stod(val);
            else if (key == "z_im") c.z_im = std::stod(val);
            else if (key == "box_l") c.box_l = std::stoi(val);
            else if (key == "n_samples") c.n_samples = std::stol(val);
            else if (key == "n_max") c.n_max = std::stoi(val);
            else if (key == "window") c.window = std::stoi(val);
            else if (key == "gamma_fraction") c.gamma_fraction = std::stod(val);
            else if (key == "beta_dyn") c.beta_dyn = std::stod(val);
            else if (key == "t_max") c.t_max = std::stod(val);
            else if (key == "t_points") c.t_points = std::stoi(val);
            else if (key == "realizations") c.realizations = std::stoi(val);
            else if (key == "seed") c.master_seed = std::stoull(val);
            else if (key == "out") c.output_dir = val;
            else if (key == "format") c.format = val;
            else if (key == "threads") c.threads = std::stoi(val);
            else if (key == "distances") {
                c.distances.clear();
                std::istringstream ds(val);
                std::string tok;
                while (std::getline(ds, tok, ','))
                    c.distances.push_back(std::stoi(trim(tok)));
            } else {
                violations.push_back("unknown key '" + key + "'");
            }
        } catch (const std::exception&) {
            violations.push_back("key '" + key + "': cannot parse value '" + val + "'");
        }
    }

    // validate everything, reporting the full list rather than the first hit
    bool known_command = false;
    for (const char* cmd : kCommands) known_command |= c.command == cmd;
    if (!known_command)
        violations.push_back("command must be one of kernel, resolvent, saw, thresholds, "
                             "mc, verify-bounds, eigen, dynamics (got '" + c.command + "')");
    if (c.d < 1 || c.d > 3) violations.push_back("d must be 1, 2 or 3");
    if (!(c.alpha > 0.0) || c.alpha > 1.0)
        violations.push_back("alpha must lie in (0,1]");
    else if (c.d >= 1 && c.d <= 3) {
        const double s_lo = c.d / (c.d + 2.0 * c.alpha);
        if (c.command != "kernel" && c.command != "resolvent" &&
            (!(c.s > s_lo) || !(c.s < 1.0)))
            violations.push_back("s must lie in (d/(d+2 alpha), 1) = (" + fmt17(s_lo) +
                                 ", 1), got " + fmt17(c.s));
    }
    if (c.mass < 0.0) violations.push_back("mass must be >= 0");
    if (c.radius < 1) violations.push_back("radius must be >= 1");
    if (c.method != "bochner" && c.method != "fourier")
        violations.push_back("method must be bochner or fourier");
    if (!(c.disorder_width > 0.0)) violations.push_back("disorder_width must be > 0");
    if (c.lambda < 0.0) violations.push_back("lambda must be >= 0 (0 = automatic)");
    if (c.z_im == 0.0) violations.push_back("z_im must be nonzero");
    if (c.box_l < 1) violations.push_back("box_l must be >= 1");
    if (c.n_samples < 100 && (c.command == "mc" || c.command == "verify-bounds"))
        violations.push_back("n_samples must be >= 100");
    if (c.n_max < 0 || c.n_max > 6) violations.push_back("n_max must lie in [0, 6]");
    if (!(c.gamma_fraction >= 0.0) || c.gamma_fraction >= 1.0)
        violations.push_back("gamma_fraction must lie in [0, 1)");
    if (c.format != "csv" && c.format != "json")
        violations.push_back("format must be csv or json");
    if (c.threads < 0) violations.push_back("threads must be >= 0");
    for (int r : c.distances)
        if (r < 1 || r > c.box_l)
            violations.push_back("distance " + std::to_string(r) + " outside the box");

    if (!violations.empty()) {
        std::string msg = "invalid configuration:";
        for (const std::string& v : violations) msg += "\n  - " + v;
        throw ConfigInvalid(msg);
    }
    return c;
}

RunConfig parse_config(const std::string& path) {
    return parse_config_text(read_file(path));
}

namespace {

void write_manifest(const RunConfig& c, const nlohmann::json& resolved,
                    const std::string& dir) {
    nlohmann::json j;
    j["tool"] = "fraclat";
    j["version"] = "0.1.0";
    j["command"] = c.command;
    j["seed"] = c.master_seed;
    j["threads"] = omp_get_max_threads();
    j["format"] = c.format;
    j["resolved"] = resolved;
    j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    std::ofstream f(dir + "/manifest.json");
    if (!f) throw Error("cannot open manifest");
    f << j.dump(2) << "\n";
}

// shared model assembly: kernel table covering the box, thresholds, lambda
struct ModelBundle {
    KernelTable kernel;
    SawKernel saw;
    double lambda0 = 0.0;
    double lambda = 0.0;
    DerivedParams derived;
};

ModelBundle make_bundle(const RunConfig& c, int needed_radius) {
    ModelBundle b;
    QuadratureSpec quad;
    quad.method = c.method == "fourier" ? QuadMethod::fourier_grid
                                        : QuadMethod::bochner_bessel;
    b.kernel = kernel_table({c.d, c.alpha}, needed_radius, quad);
    b.saw = saw_kernel_from_laplacian(b.kernel, c.s);
    DisorderSpec dis = DisorderSpec::uniform(c.disorder_width);
    b.lambda0 = threshold_saw(c.s, dis, b.saw);
    b.lambda = c.lambda > 0.0 ? c.lambda : 3.0 * b.lambda0;
    b.derived = derived_params(c.s, dis.tau, dis.m_tau, b.lambda, c.d, c.alpha);
    return b;
}

int run_inner(const RunConfig& c) {
    const std::string dir = c.output_dir;
    std::filesystem::create_directories(dir);
    DisorderSpec dis = DisorderSpec::uniform(c.disorder_width);
    nlohmann::json resolved;
    resolved["d"] = c.d;
    resolved["alpha"] = c.alpha;
    resolved["seed"] = c.master_seed;

    if (c.command == "kernel") {
        QuadratureSpec quad;
        quad.method = c.method == "fourier" ? QuadMethod::fourier_grid
                                            : QuadMethod::bochner_bessel;
        KernelTable t = kernel_table({c.d, c.alpha}, c.radius, quad);
        write_kernel_csv(t, dir + "/kernel.csv");
        write_kernel_json_summary(t, dir + "/kernel.json");
        resolved["radius"] = c.radius;
        resolved["method"] = c.method;
        write_manifest(c, resolved, dir);
        return 0;
    }

    if (c.command == "resolvent") {
        ResolventParams rp{{c.d, c.alpha}, c.mass};
        std::vector<Offset> xs;
        std::vector<double> vals;
        double tol = 0.0;
        for (int r = 0; r <= c.radius; ++r) {
            Offset x(c.d, 0);
            x[0] = r;
            EntryResult e = c.mass > 0.0 ? resolvent_entry_checked(rp, x)
                                         : inverse_entry_checked({c.d, c.alpha}, x);
            xs.push_back(x);
            vals.push_back(e.value);
            tol = std::max(tol, e.tol);
        }
        write_resolvent_csv(rp, xs, vals, tol, dir + "/resolvent.csv");
        resolved["mass"] = c.mass;
        resolved["radius"] = c.radius;
        write_manifest(c, resolved, dir);
        return 0;
    }

    if (c.command == "saw") {
        const int window = c.window > 0 ? c.window : 12;
        ModelBundle b = make_bundle(c, std::max(c.radius, 2 * window));
        const double gamma = c.gamma_fraction / b.saw.rho_upper();
        SawEnumeration e = enumerate_saws(b.saw, c.n_max, window, 400000000);
        write_counts_csv(e, dir + "/saw_counts.csv");
        write_two_point_csv(b.saw, e, gamma, dir + "/saw_two_point.csv");
        DecayBoundReport rep = decay_bound_check(b.saw, gamma, b.saw.decay_a, 2,
                                                 std::max(4, window - 2), c.n_max,
                                                 window, 400000000);
        nlohmann::json j;
        j["gamma"] = gamma;
        j["k0"] = rep.k0;
        j["ell_tilde"] = rep.ell_tilde;
        j["chi_upper"] = rep.chi_upper;
        j["window_loss"] = rep.window_loss;
        j["max_ratio"] = rep.max_ratio;
        j["pass"] = rep.pass;
        std::ofstream f(dir + "/saw_decay_check.json");
        f << j.dump(2) << "\n";
        resolved["gamma"] = gamma;
        resolved["window"] = window;
        resolved["n_max"] = c.n_max;
        write_manifest(c, resolved, dir);
        return rep.pass ? 0 : 1;
    }

    if (c.command == "thresholds") {
        ModelBundle b = make_bundle(c, c.radius);
        const double beta = c.beta >= 0.0 ? c.beta : b.derived.alpha_s;
        ThresholdReport rep = threshold_chain(c.s, beta, dis, b.kernel, b.saw);
        write_threshold_json(rep, dir + "/thresholds.json");
        resolved["s"] = c.s;
        resolved["beta"] = beta;
        resolved["lambda0"] = rep.lambda0;
        write_manifest(c, resolved, dir);
        const bool ordered = rep.lambda0 < rep.lambda_am && rep.lambda_am < rep.lambda_ag;
        return ordered ? 0 : 1;
    }

    if (c.command == "mc") {
        ModelBundle b = make_bundle(c, 2 * c.box_l);
        BoxGeometry box = BoxGeometry::cube(c.d, c.box_l);
        ModelParams p{{c.d, c.alpha}, dis, b.lambda, c.s, {c.z_re, c.z_im}};
        std::vector<std::pair<Offset, Offset>> pairs;
        for (int r : c.distances) {
            Offset x(c.d, 0);
            x[0] = r;
            pairs.push_back({Offset(c.d, 0), x});
        }
        auto mc = fractional_moment_mc(p, box, b.kernel, pairs, c.n_samples,
                                       c.master_seed);
        write_mc_csv(mc, dir + "/mc.csv");
        resolved["lambda"] = b.lambda;
        resolved["n_samples"] = c.n_samples;
        write_manifest(c, resolved, dir);
        return 0;
    }

    if (c.command == "verify-bounds") {
        ModelBundle b = make_bundle(c, 2 * c.box_l);
        BoxGeometry box = BoxGeometry::cube(c.d, c.box_l);
        ModelParams p{{c.d, c.alpha}, dis, b.lambda, c.s, {c.z_re, c.z_im}};

        nlohmann::json j;
        if (b.lambda <= b.lambda0) {
            // the comparison theorem only speaks above lambda0
            j["precondition_unmet"] = true;
            j["note"] = "lambda <= lambda0(s): the SAW comparison does not apply";
            j["lambda"] = b.lambda;
            j["lambda0"] = b.lambda0;
            std::ofstream f(dir + "/bounds.json");
            f << j.dump(2) << "\n";
            write_manifest(c, resolved, dir);
            return 1;
        }
        std::vector<std::pair<Offset, Offset>> pairs;
        for (int r : c.distances) {
            Offset x(c.d, 0);
            x[0] = r;
            pairs.push_back({Offset(c.d, 0), x});
        }
        auto mc = fractional_moment_mc(p, box, b.kernel, pairs, c.n_samples,
                                       c.master_seed);
        write_mc_csv(mc, dir + "/mc.csv");
        const double gamma = b.derived.gamma;
        const int window = c.window > 0 ? c.window
                                        : std::min({24, c.box_l,
                                                    b.saw.truncation_radius / 2});
        SawEnumeration e = enumerate_saws(b.saw, std::min(c.n_max + 1, 5), window,
                                          400000000);
        std::vector<TwoPointValue> tp;
        for (auto& pr : pairs) tp.push_back(two_point_from(e, b.saw, gamma, pr.second));
        DecayBoundReport db = decay_bound_check(b.saw, gamma, b.saw.decay_a, 2,
                                                std::max(4, window - 2),
                                                std::min(c.n_max, 4), window, 400000000);
        SawBoundReport rep = saw_bound_check(p, mc, tp, gamma, db.k0);
        write_bound_json(rep, dir + "/bounds.json");
        resolved["lambda"] = b.lambda;
        resolved["gamma"] = gamma;
        resolved["k0"] = db.k0;
        write_manifest(c, resolved, dir);
        return rep.all_pass ? 0 : 1;
    }

    if (c.command == "eigen") {
        ModelBundle b = make_bundle(c, 2 * c.box_l);
        BoxGeometry box = BoxGeometry::cube(c.d, c.box_l);
        ModelParams p{{c.d, c.alpha}, dis, b.lambda, c.s, {c.z_re, c.z_im}};
        std::vector<double> medians;
        nlohmann::json runs = nlohmann::json::array();
        for (int r = 0; r < c.realizations; ++r) {
            std::vector<double> omega =
                sample_disorder(dis, box, c.master_seed, uint64_t(r));
            EigenDecayReport rep = eigen_decay_analysis(p, box, b.kernel, omega, 0.3);
            medians.push_back(rep.median_t);
            nlohmann::json one;
            one["median_t"] = rep.median_t;
            one["fraction_passing"] = rep.fraction_passing;
            one["threshold_t"] = rep.threshold_t;
            runs.push_back(one);
        }
        std::sort(medians.begin(), medians.end());
        nlohmann::json j;
        j["runs"] = runs;
        j["ensemble_median_t"] = medians[medians.size() / 2];
        j["threshold_t"] = 2.0 * b.derived.alpha_s - 0.3;
        std::ofstream f(dir + "/eigen.json");
        f << j.dump(2) << "\n";
        resolved["lambda"] = b.lambda;
        resolved["realizations"] = c.realizations;
        write_manifest(c, resolved, dir);
        return medians[medians.size() / 2] >= 2.0 * b.derived.alpha_s - 0.3 ? 0 : 1;
    }

    if (c.command == "dynamics") {
        ModelBundle b = make_bundle(c, 2 * c.box_l);
        BoxGeometry box = BoxGeometry::cube(c.d, c.box_l);
        ModelParams p{{c.d, c.alpha}, dis, b.lambda, c.s, {c.z_re, c.z_im}};
        std::vector<double> omega = sample_disorder(dis, box, c.master_seed, 0);
        std::vector<double> t_grid;
        for (int i = 0; i < c.t_points; ++i)
            t_grid.push_back(c.t_max * std::pow(10.0, -3.0 * (c.t_points - 1 - i) /
                                                           std::max(1, c.t_points - 1)));
        DynamicalMomentResult dm =
            dynamical_moment(p, box, b.kernel, omega, c.beta_dyn, t_grid);
        std::ofstream f(dir + "/dynamics.csv");
        for (auto [t, m] : dm.per_time) f << fmt17(t) << "," << fmt17(m) << "\n";
        nlohmann::json j;
        j["max_moment"] = dm.max_moment;
        j["boundary_mass"] = dm.boundary_mass;
        std::ofstream g(dir + "/dynamics.json");
        g << j.dump(2) << "\n";
        resolved["lambda"] = b.lambda;
        resolved["beta_dyn"] = c.beta_dyn;
        write_manifest(c, resolved, dir);
        return 0;
    }

    throw ConfigInvalid("unknown command " + c.command);
}

}  // namespace

int run(const RunConfig& config) {
    const char* env_threads = std::getenv("FRACLAT_THREADS");
    if (env_threads != nullptr) {
        const int t = std::atoi(env_threads);
        if (t > 0) omp_set_num_threads(t);
    } else if (config.threads > 0) {
        omp_set_num_threads(config.threads);
    }
    try {
        return run_inner(config);
    } catch (const ConfigInvalid&) {
        throw;  // caller formats configuration problems
    } catch (const Error& e) {
        std::ofstream f(config.output_dir + "/error.txt");
        f << e.what() << "\n";
        return 2;
    }
}

}  // namespace fraclat
