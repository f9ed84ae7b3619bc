#include "fraclat/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fraclat/errors.hpp"
#include "fraclat/fit.hpp"
#include "fraclat/io.hpp"
#include "fraclat/special.hpp"
#include "fraclat/symbol.hpp"

namespace fraclat {

void FracLaplacianParams::validate() const {
    if (d < 1 || d > 3) throw InvalidAlpha("dimension must be 1, 2 or 3");
    if (!(alpha > 0.0) || alpha > 1.0) throw InvalidAlpha("alpha must lie in (0,1]");
}

long KernelTable::index_of(const Offset& x) const {
    if (int(x.size()) != params.d)
        throw RadiusTooSmall("offset dimension mismatch");
    long idx = 0;
    const long side = 2L * radius + 1;
    for (int j = 0; j < params.d; ++j) {
        if (std::abs(x[j]) > radius)
            throw RadiusTooSmall("offset outside kernel table radius");
        idx = idx * side + (x[j] + radius);
    }
    return idx;
}

namespace {

// Exact entries of the alpha = 1 nearest-neighbor stencil.
double stencil_entry(int d, const Offset& x) {
    if (is_zero(x)) return 2.0 * d;
    return norm1(x) == 1 ? -1.0 : 0.0;
}

double heat_at(const Offset& x, double t) { return heat_kernel(x, t); }

long bochner_budget(const QuadratureSpec& quad) {
    return quad.resolution > 0 ? std::max(2000L, long(quad.resolution)) : 200000L;
}

// A piece may fail its own relative target when it carries none of the mass;
// the entry is accepted as long as the combined error is small next to the
// combined value.
void require_combined(double total, double err, double rel) {
    if (!(err <= std::max(10.0 * rel * std::abs(total), 1e-280)))
        throw QuadratureDivergence("bochner quadrature failed to reach tolerance");
}

// Bochner representation: integrates t^{-1-alpha} [heat(x,t) - delta_x0]
// against dt / |Gamma(-alpha)| with graded substitutions that remove the
// endpoint singularities.
EntryResult bochner_entry(const FracLaplacianParams& p, const Offset& x,
                          const QuadratureSpec& quad) {
    const int d = p.d;
    const double alpha = p.alpha;
    const double T =
        quad.split_point > 0.0 ? quad.split_point : std::max(1.0, norm1(x) / (2.0 * d));
    const double ag = abs_gamma_neg_alpha(alpha);
    const long budget = bochner_budget(quad);
    const double rel = quad.rel_tol;
    double total = 0.0, err = 0.0;

    if (is_zero(x)) {
        // [0,t0]: series of 1 - e^{-2dt} I_0(2t)^d, no cancellation
        const double t0 = 1e-4;
        const double coef[3] = {2.0 * d, -(2.0 * d * d + d),
                                2.0 * d * d + 4.0 / 3.0 * d * d * d};
        const int terms = std::clamp(quad.tail_terms, 1, 3);
        for (int i = 0; i < terms; ++i)
            total += coef[i] * std::pow(t0, i + 1 - alpha) / (i + 1 - alpha);
        if (terms < 3)  // truncation of the series piece
            err += std::abs(coef[terms]) * std::pow(t0, terms + 1 - alpha) / (terms + 1 - alpha);
        else
            err += 4.0 * d * d * d * d * std::pow(t0, 4.0 - alpha) / (4.0 - alpha);

        auto g = [&](double t) {
            return t > t0 ? 1.0 - std::pow(scaled_bessel_i(0, t), d)
                          : 2.0 * d * t;  // not reached above t0
        };
        QuadResult mid = adaptive_gk15(
            [&](double t) { return std::pow(t, -1.0 - alpha) * g(t); }, t0, T, rel, 0.0,
            budget);
        total += mid.value;
        err += mid.error_estimate;

        // [T,inf): t^{-1-alpha} integrates exactly; subtract the heat part
        total += std::pow(T, -alpha) / alpha;
        const double gp = std::max(1.0, 4.0 / (alpha + 0.5 * d));
        QuadResult tail = adaptive_gk15(
            [&](double w) {
                const double t = T / std::pow(w, gp);
                return std::pow(T, -alpha) * gp * std::pow(w, gp * alpha - 1.0) *
                       heat_at(x, t);
            },
            0.0, 1.0, rel, 0.0, budget);
        total -= tail.value;
        err += tail.error_estimate;
        require_combined(total, err, rel);
        return {total / ag, err / ag};
    }

    // x != 0: integrand t^{-1-alpha} heat(x,t), positive throughout.
    // Below t_sw the heat kernel is its leading series term
    // t^{|x|_1} e^{-2dt} / prod |x_j|!, integrated in closed form; the graded
    // substitution t = T u^gl then only has to cover [t_sw, T]. For alpha
    // near 1 and |x|_1 = 1 most of the mass sits in the closed-form piece.
    const int n1 = norm1(x);
    const double gl = std::max(1.0, 4.0 / (n1 - alpha));
    double log_fact = 0.0;  // log prod |x_j|!
    for (int c : x) log_fact += std::lgamma(std::abs(c) + 1.0);
    const double t_sw = 1.5e-8;
    double inv_corr = 0.0;  // sum_j 1/(|x_j|+1), next series-term scale
    for (int c : x) inv_corr += 1.0 / (std::abs(c) + 1.0);
    double head = 0.0;
    for (int k = 0; k <= 2; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        head += sign * std::exp(k * std::log(2.0 * d) - std::lgamma(k + 1.0) +
                                (n1 - alpha + k) * std::log(t_sw) -
                                std::log(n1 - alpha + k) - log_fact);
    }
    total += head;
    err += std::exp(3.0 * std::log(2.0 * d) - std::lgamma(4.0) +
                    (n1 - alpha + 3.0) * std::log(t_sw) - std::log(n1 - alpha + 3.0) -
                    log_fact) +
           inv_corr * std::exp((n1 - alpha + 2.0) * std::log(t_sw) -
                               std::log(n1 - alpha + 2.0) - log_fact);
    const double u_star = std::exp(std::log(t_sw / T) / gl);
    QuadResult low = adaptive_gk15(
        [&](double u) {
            if (u <= 0.0) return 0.0;
            const double t = std::exp(std::log(T) + gl * std::log(u));
            return std::pow(t, -1.0 - alpha) * heat_at(x, t) * T * gl *
                   std::pow(u, gl - 1.0);
        },
        u_star, 1.0, rel, 0.0, budget);
    total += low.value;
    err += low.error_estimate;

    const double gp = std::max(1.0, 4.0 / (alpha + 0.5 * d));
    QuadResult tail = adaptive_gk15(
        [&](double w) {
            const double t = T / std::pow(w, gp);
            return std::pow(T, -alpha) * gp * std::pow(w, gp * alpha - 1.0) *
                   heat_at(x, t);
        },
        0.0, 1.0, rel, 0.0, budget);
    total += tail.value;
    err += tail.error_estimate;
    require_combined(total, err, rel);
    return {-total / ag, err / ag};
}

EntryResult fourier_entry(const FracLaplacianParams& p, const Offset& x,
                          const QuadratureSpec& quad) {
    const int n0 = fourier_base_n(p.d, quad.resolution);
    const double alpha = p.alpha;
    Extrapolated e = symbol_entry(p.d, x, n0, p.d + 2.0 * alpha,
                                  [alpha](double f) { return std::pow(f, alpha); });
    return {e.value, e.tol};
}

}  // namespace

EntryResult frac_laplacian_entry_checked(const FracLaplacianParams& params, const Offset& x,
                                         const QuadratureSpec& quad) {
    params.validate();
    if (int(x.size()) != params.d) throw InvalidAlpha("offset dimension mismatch");
    if (params.alpha == 1.0) return {stencil_entry(params.d, x), 0.0};
    if (quad.method == QuadMethod::fourier_grid) return fourier_entry(params, x, quad);
    return bochner_entry(params, x, quad);
}

double frac_laplacian_entry(const FracLaplacianParams& params, const Offset& x,
                            const QuadratureSpec& quad) {
    return frac_laplacian_entry_checked(params, x, quad).value;
}

double lattice_tail_sum_bound(int d, int radius, double p) {
    if (p <= d) return std::numeric_limits<double>::infinity();
    const double shell_coef[3] = {2.0, 8.0, 26.0};  // bounds on shell point counts / r^{d-1}
    return shell_coef[d - 1] * std::pow(double(radius), d - p) / (p - d);
}

// Estimate (not bound) of sum_{|x|_inf > radius} |x|_2^{-p}: exact shells out
// to a large cutoff, continuum remainder after that.
double lattice_tail_sum_estimate(int d, int radius, double p) {
    double sum = 0.0;
    if (d == 1) {
        const long far = radius + 200000;
        for (long r = radius + 1; r <= far; ++r) sum += 2.0 * std::pow(double(r), -p);
        sum += 2.0 * std::pow(far + 0.5, 1.0 - p) / (p - 1.0);
        return sum;
    }
    if (d == 2) {
        const int far = std::max(4000, 20 * radius);
        for (int r = radius + 1; r <= far; ++r) {
            double shell = 0.0;
            for (int a = -r; a <= r; ++a)
                shell += 2.0 * std::pow(double(r) * r + double(a) * a, -0.5 * p);
            for (int a = -r + 1; a <= r - 1; ++a)
                shell += 2.0 * std::pow(double(a) * a + double(r) * r, -0.5 * p);
            sum += shell;
        }
        return sum + 2.0 * M_PI * std::pow(far + 0.5, 2.0 - p) / (p - 2.0);
    }
    const int far = std::max(300, 5 * radius);
    for (int r = radius + 1; r <= far; ++r) {
        double shell = 0.0;
        const double rr = double(r) * r;
        for (int a = -r; a <= r; ++a)
            for (int b = -r; b <= r; ++b)
                shell += 2.0 * std::pow(rr + double(a) * a + double(b) * b, -0.5 * p);
        for (int a = -r + 1; a <= r - 1; ++a)
            for (int b = -r; b <= r; ++b)
                shell += 2.0 * std::pow(double(a) * a + rr + double(b) * b, -0.5 * p);
        for (int a = -r + 1; a <= r - 1; ++a)
            for (int b = -r + 1; b <= r - 1; ++b)
                shell += 2.0 * std::pow(double(a) * a + double(b) * b + rr, -0.5 * p);
        sum += shell;
    }
    return sum + 4.0 * M_PI * std::pow(far + 0.5, 3.0 - p) / (p - 3.0);
}

KernelTable kernel_table(const FracLaplacianParams& params, int radius,
                         const QuadratureSpec& quad) {
    params.validate();
    if (radius < 1) throw RadiusTooSmall("kernel table radius must be >= 1");
    KernelTable t;
    t.params = params;
    t.radius = radius;
    t.method = quad.method == QuadMethod::fourier_grid ? "fourier" : "bochner";
    const long side = 2L * radius + 1;
    long n = 1;
    for (int j = 0; j < params.d; ++j) n *= side;
    t.values.assign(n, 0.0);

    const std::vector<Offset> reps = box_orbit_representatives(params.d, radius);
    std::vector<double> rep_val(reps.size()), rep_tol(reps.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < long(reps.size()); ++i) {
        EntryResult e = frac_laplacian_entry_checked(params, reps[i], quad);
        rep_val[i] = e.value;
        rep_tol[i] = e.tol;
    }
    for (size_t i = 0; i < reps.size(); ++i) {
        for (const Offset& img : orbit_of(reps[i])) t.values[t.index_of(img)] = rep_val[i];
        t.quad_tol = std::max(t.quad_tol, rep_tol[i]);
    }
    if (quad.method == QuadMethod::bochner_bessel && t.quad_tol == 0.0)
        t.quad_tol = quad.rel_tol;

    if (params.alpha == 1.0) {
        t.tail_bound = 0.0;
    } else {
        const double p = params.d + 2.0 * params.alpha;
        double upper = 0.0;
        const double lo = std::max(2.0, 0.5 * radius);
        for (const Offset& rep : reps) {
            const double r2 = norm2(rep);
            if (r2 >= lo) upper = std::max(upper, std::abs(t.at(rep)) * std::pow(r2, p));
        }
        if (upper == 0.0)
            for (const Offset& rep : reps)
                if (!is_zero(rep))
                    upper = std::max(upper,
                                     std::abs(t.at(rep)) * std::pow(norm2(rep), p));
        t.tail_bound = 1.1 * upper * lattice_tail_sum_bound(params.d, radius, p);
    }
    return t;
}

DecayFit decay_constant_estimate(const KernelTable& table, double r_min, double r_max) {
    if (r_max > table.radius + 1e-9)
        throw FitUnstable("fit window extends beyond table radius");
    const double p = table.params.d + 2.0 * table.params.alpha;
    std::vector<double> r, v;
    double upper = 0.0, lower = std::numeric_limits<double>::infinity();
    for (const Offset& rep : box_orbit_representatives(table.params.d, table.radius)) {
        const double r2 = norm2(rep);
        if (r2 < r_min || r2 > r_max) continue;
        const double a = std::abs(table.at(rep));
        if (a > 0.0) {
            upper = std::max(upper, a * std::pow(r2, p));
            lower = std::min(lower, a * std::pow(r2, p));
        }
        r.push_back(r2);
        v.push_back(a);
    }
    PowerLawFit f = fit_power_law(r, v);
    DecayFit out;
    out.c_est = f.c;
    out.exponent_est = f.exponent;
    out.upper_const = upper;
    out.residual_var = f.residual_var;
    out.n = f.n;
    return out;
}

double row_sum_residual(const KernelTable& table, double tail_tolerance) {
    if (table.tail_bound > tail_tolerance)
        throw RadiusTooSmall("tail bound " + std::to_string(table.tail_bound) +
                             " exceeds tolerance");
    double raw = 0.0;
    for (double v : table.values) raw += v;
    if (table.params.alpha == 1.0) return raw;
    const double p = table.params.d + 2.0 * table.params.alpha;
    // correct by the estimated (negative) kernel mass beyond the radius
    DecayFit fit = decay_constant_estimate(table, std::max(4.0, 0.5 * table.radius),
                                           double(table.radius));
    return raw - fit.c_est * lattice_tail_sum_estimate(table.params.d, table.radius, p);
}

std::vector<double> limit_probe(const Offset& x, int d, const std::vector<double>& alphas,
                                const QuadratureSpec& quad) {
    std::vector<double> out;
    out.reserve(alphas.size());
    for (size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0) || alphas[i] >= 1.0)
            throw InvalidAlpha("limit_probe expects alphas in (0,1)");
        if (i > 0 && alphas[i] < alphas[i - 1])
            throw InvalidAlpha("limit_probe expects sorted alphas");
        FracLaplacianParams p{d, alphas[i]};
        out.push_back(std::abs(frac_laplacian_entry(p, x, quad)));
    }
    return out;
}

void write_kernel_csv(const KernelTable& table, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path);
    f << "# d=" << table.params.d << " alpha=" << fmt17(table.params.alpha)
      << " radius=" << table.radius << " method=" << table.method
      << " tol=" << fmt17(table.quad_tol) << "\n";
    for (const Offset& x : box_offsets(table.params.d, table.radius)) {
        for (int c : x) f << c << ",";
        f << fmt17(table.at(x)) << "\n";
    }
}

void write_kernel_json_summary(const KernelTable& table, const std::string& path) {
    nlohmann::json j;
    j["d"] = table.params.d;
    j["alpha"] = table.params.alpha;
    j["radius"] = table.radius;
    j["method"] = table.method;
    j["tol"] = table.quad_tol;
    j["tail_bound"] = table.tail_bound;
    j["value_at_origin"] = table.at(Offset(table.params.d, 0));
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path);
    f << j.dump(2) << "\n";
}

KernelTable read_kernel_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path);
    std::string header;
    std::getline(f, header);
    KernelTable t;
    std::istringstream hs(header);
    std::string tok;
    while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "d") t.params.d = std::stoi(val);
        else if (key == "alpha") t.params.alpha = std::stod(val);
        else if (key == "radius") t.radius = std::stoi(val);
        else if (key == "method") t.method = val;
        else if (key == "tol") t.quad_tol = std::stod(val);
    }
    const long side = 2L * t.radius + 1;
    long n = 1;
    for (int j = 0; j < t.params.d; ++j) n *= side;
    t.values.assign(n, 0.0);
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Offset x(t.params.d);
        std::string cell;
        for (int j = 0; j < t.params.d; ++j) {
            std::getline(ls, cell, ',');
            x[j] = std::stoi(cell);
        }
        std::getline(ls, cell, ',');
        t.values[t.index_of(x)] = std::stod(cell);
    }
    return t;
}

}  // namespace fraclat
