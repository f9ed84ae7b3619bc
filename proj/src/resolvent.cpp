#include "fraclat/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fraclat/errors.hpp"
#include "fraclat/fit.hpp"
#include "fraclat/io.hpp"
#include "fraclat/quadrature.hpp"
#include "fraclat/special.hpp"
#include "fraclat/symbol.hpp"

namespace fraclat {

void ResolventParams::validate() const {
    lap.validate();
    if (mass < 0.0) throw InvalidMass("mass must be >= 0");
    if (mass == 0.0 && !(lap.alpha < 0.5 * lap.d))
        throw AlphaTooLarge("massless inverse needs alpha < d/2");
}

EntryResult resolvent_entry_checked(const ResolventParams& rp, const Offset& x,
                                    const QuadratureSpec& quad) {
    rp.validate();
    if (rp.mass <= 0.0) throw InvalidMass("resolvent_entry needs mass > 0");
    const double alpha = rp.lap.alpha;
    const double m2 = rp.mass * rp.mass;
    const int n0 = fourier_base_n(rp.lap.d, quad.resolution);
    Extrapolated e =
        symbol_entry(rp.lap.d, x, n0, rp.lap.d + 2.0 * alpha,
                     [alpha, m2](double f) { return 1.0 / (std::pow(f, alpha) + m2); });
    return {e.value, e.tol};
}

double resolvent_entry(const ResolventParams& rp, const Offset& x,
                       const QuadratureSpec& quad) {
    return resolvent_entry_checked(rp, x, quad).value;
}

namespace {

// int_0^eps k^beta cos(xk) dk by the cosine series; fast for |x| eps <= 0.5
double core_cos_moment(double beta, double eps, double x) {
    double sum = 0.0, pw = 1.0;  // (-1)^m x^{2m} / (2m)!
    for (int m = 0; m < 24; ++m) {
        const double term = pw * std::pow(eps, beta + 2 * m + 1) / (beta + 2 * m + 1);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        pw *= -x * x / ((2.0 * m + 1.0) * (2.0 * m + 2.0));
    }
    return sum;
}

// d = 1 massless inverse: f^{-alpha} = k^{-2a}(1 + c1 k^2 + c2 k^4 + ...)
// integrated in series on [0,eps], adaptive rule on the rest.
EntryResult inverse_entry_1d(double alpha, int xi, const QuadratureSpec& quad) {
    const double x = std::abs(double(xi));
    const double eps = std::min(0.3 / (x + 1.0), 0.05);
    const double c1 = alpha / 12.0;
    const double c2 = alpha * (alpha + 1.0) / 288.0 - alpha / 360.0;
    const double core = core_cos_moment(-2.0 * alpha, eps, x) +
                        c1 * core_cos_moment(2.0 - 2.0 * alpha, eps, x) +
                        c2 * core_cos_moment(4.0 - 2.0 * alpha, eps, x);
    auto integrand = [&](double k) {
        const double s = 2.0 * std::sin(0.5 * k);
        return std::pow(s * s, -alpha) * std::cos(x * k);
    };
    QuadResult main = adaptive_gk15(integrand, eps, M_PI, quad.rel_tol,
                                    1e-14 * (std::abs(core) + 1.0), 400000);
    if (!main.converged) throw QuadratureDivergence("graded inverse quadrature failed");
    const double err = main.error_estimate + alpha * std::pow(eps, 7.0 - 2.0 * alpha) +
                       1e-16 * std::abs(core);
    return {(core + main.value) / M_PI, err / M_PI};
}

}  // namespace

EntryResult inverse_entry_checked(const FracLaplacianParams& lap, const Offset& x,
                                  const QuadratureSpec& quad) {
    lap.validate();
    if (!(lap.alpha < 0.5 * lap.d)) throw AlphaTooLarge("inverse needs alpha < d/2");
    if (lap.d == 1) return inverse_entry_1d(lap.alpha, x[0], quad);
    const double alpha = lap.alpha;
    // the weaker d - 2 alpha aliasing decay needs denser base grids than the
    // kernel route
    const int n0 = quad.resolution > 0 ? fourier_base_n(lap.d, quad.resolution)
                                       : (lap.d == 2 ? 1024 : 128);
    Extrapolated e = symbol_entry(lap.d, x, n0, lap.d - 2.0 * alpha,
                                  [alpha](double f) { return std::pow(f, -alpha); });
    if (e.tol > 1e-3 * std::abs(e.value))
        throw QuadratureDivergence("inverse symbol grid failed to extrapolate");
    return {e.value, e.tol};
}

double inverse_entry(const FracLaplacianParams& lap, const Offset& x,
                     const QuadratureSpec& quad) {
    return inverse_entry_checked(lap, x, quad).value;
}

double riesz_constant(double alpha, int d) {
    if (!(alpha > 0.0)) throw InvalidAlpha("alpha must be positive");
    if (!(alpha < 0.5 * d)) throw AlphaTooLarge("riesz constant needs alpha < d/2");
    return std::tgamma(0.5 * d - alpha) / std::tgamma(alpha) *
           std::pow(2.0, 0.5 * d - 2.0 * alpha);
}

double neumann_partial(const ResolventParams& rp, const Offset& x, int N,
                       const KernelTable& table) {
    rp.validate();
    if (rp.mass <= 0.0) throw InvalidMass("neumann_partial needs mass > 0");
    if (N < 0 || N > 64) throw Error("neumann_partial order cap is 64");
    const int d = table.params.d;
    const double m_a2 = rp.mass * rp.mass + table.at(Offset(d, 0));
    if (N >= 1 && table.tail_bound > 0.25 * m_a2)
        throw RadiusTooSmall("kernel tail too heavy for the convolution window");

    const std::vector<Offset> box = box_offsets(d, table.radius);
    const long n = long(box.size());
    std::vector<double> v(n, 0.0), next(n, 0.0);
    v[table.index_of(Offset(d, 0))] = 1.0;

    double result = (norm_inf(x) == 0) ? 1.0 / m_a2 : 0.0;
    const long target = table.index_of(x);
    Offset diff(d);
    for (int level = 1; level <= N; ++level) {
        std::fill(next.begin(), next.end(), 0.0);
        for (long zi = 0; zi < n; ++zi) {
            const double vz = v[zi];
            if (vz == 0.0) continue;
            const Offset& z = box[zi];
            for (long yi = 0; yi < n; ++yi) {
                if (yi == zi) continue;
                bool in_range = true;
                for (int j = 0; j < d; ++j) {
                    diff[j] = box[yi][j] - z[j];
                    if (std::abs(diff[j]) > table.radius) {
                        in_range = false;
                        break;
                    }
                }
                if (!in_range) continue;
                next[yi] += std::abs(table.at(diff)) * vz / m_a2;
            }
        }
        std::swap(v, next);
        result += v[target] / m_a2;
    }
    return result;
}

TailCheckReport resolvent_tail_check(const ResolventParams& rp, double r_min,
                                     double r_max, const QuadratureSpec& quad) {
    rp.validate();
    if (rp.mass <= 0.0) throw InvalidMass("tail check needs mass > 0");
    if (rp.lap.d != 1) throw Error("resolvent_tail_check is a d = 1 diagnostic");
    const double alpha = rp.lap.alpha;
    const double m2 = rp.mass * rp.mass;
    std::vector<Offset> xs;
    std::vector<double> radii;
    for (int r = int(std::ceil(r_min)); r <= int(r_max); ++r) {
        xs.push_back({r});
        radii.push_back(double(r));
    }
    const int n0 = fourier_base_n(1, quad.resolution);
    std::vector<Extrapolated> es = symbol_entry_batch(
        1, xs, n0, 1.0 + 2.0 * alpha,
        [alpha, m2](double f) { return 1.0 / (std::pow(f, alpha) + m2); });
    std::vector<double> vals(es.size());
    for (size_t i = 0; i < es.size(); ++i) vals[i] = es[i].value;
    PowerLawFit gf = fit_power_law(radii, vals);

    KernelTable table = kernel_table(rp.lap, int(r_max), quad);
    DecayFit kf = decay_constant_estimate(table, r_min, r_max);

    TailCheckReport rep;
    rep.fitted_exponent = gf.exponent;
    rep.constant_est = gf.c * m2 * m2;
    rep.c_kernel = kf.c_est;
    rep.relative_error = std::abs(rep.constant_est - rep.c_kernel) / kf.c_est;
    return rep;
}

namespace {

double sinc(double z) { return std::abs(z) < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z; }

// int_0^kmax k^{d-1-2a} e^{-w^2 k^2 / 2} A_d(k |x|) dk, where A_d is the
// normalized angular average of e^{ik.x} (cos / J_0 / sinc).
double fourier_side_radial(double alpha, int d, double w, double xn) {
    const double beta = d - 1.0 - 2.0 * alpha;
    const double delta = 1e-4;
    const double kmax = std::sqrt(90.0) / w;
    auto angular = [&](double z) {
        if (d == 1) return std::cos(z);
        if (d == 2) return std::cyl_bessel_j(0.0, z);
        return sinc(z);
    };
    const double c_ang = d == 1 ? 0.5 : d == 2 ? 0.25 : 1.0 / 6.0;
    const double c2 = c_ang * xn * xn + 0.5 * w * w;
    const double head = std::pow(delta, beta + 1.0) / (beta + 1.0) -
                        c2 * std::pow(delta, beta + 3.0) / (beta + 3.0);
    QuadResult main = adaptive_gk15(
        [&](double k) {
            return std::pow(k, beta) * std::exp(-0.5 * w * w * k * k) * angular(k * xn);
        },
        delta, kmax, 1e-11, 1e-15 * (std::abs(head) + 1.0), 400000);
    if (!main.converged) throw QuadratureDivergence("riesz fourier side failed");
    return head + main.value;
}

// raw Riesz potential int |x-y|^{-(d-2a)} e^{-|y|^2/(2w^2)} dy
double riesz_side(double alpha, int d, double w, double xn) {
    const double delta = 1e-6;
    const double L = xn + 14.0 * w;
    auto phi = [&](double t) { return std::exp(-0.5 * t * t / (w * w)); };
    if (d == 1) {
        const double beta = 1.0 - 2.0 * alpha;
        const double head = phi(xn) * 2.0 * std::pow(delta, 1.0 - beta) / (1.0 - beta);
        auto f = [&](double u) { return std::pow(std::abs(u), -beta) * phi(xn + u); };
        QuadResult right = adaptive_gk15(f, delta, L, 1e-11, 1e-16 * (head + 1.0), 400000);
        QuadResult left = adaptive_gk15(f, -L, -delta, 1e-11, 1e-16 * (head + 1.0), 400000);
        if (!right.converged || !left.converged)
            throw QuadratureDivergence("riesz potential side failed");
        return head + right.value + left.value;
    }
    // shell average of the gaussian around x, total over the sphere
    auto shell = [&](double r) -> double {
        if (d == 2)
            return 2.0 * M_PI * std::exp(-0.5 * (r - xn) * (r - xn) / (w * w)) *
                   scaled_bessel_i(0, 0.5 * r * xn / (w * w));
        if (xn * r < 1e-12 * w * w) return 4.0 * M_PI * phi(r) * phi(xn);
        return -2.0 * M_PI * w * w / (xn * r) *
               std::exp(-0.5 * (r - xn) * (r - xn) / (w * w)) *
               std::expm1(-2.0 * xn * r / (w * w));
    };
    const double beta = 2.0 * alpha - 1.0;  // r^{d-1} / r^{d-2a}
    const double head = shell(0.0) * std::pow(delta, beta + 1.0) / (beta + 1.0);
    QuadResult main = adaptive_gk15(
        [&](double r) { return std::pow(r, beta) * shell(r); }, delta, L, 1e-11,
        1e-16 * (std::abs(head) + 1.0), 400000);
    if (!main.converged) throw QuadratureDivergence("riesz potential side failed");
    return head + main.value;
}

}  // namespace

RieszIdentityReport riesz_identity_check(double alpha, int d, double width,
                                         const std::vector<double>& x) {
    if (!(alpha > 0.0) || !(alpha < 0.5 * d))
        throw AlphaTooLarge("riesz identity needs 0 < alpha < d/2");
    if (!(width > 0.0)) throw Error("gaussian width must be positive");
    if (int(x.size()) != d) throw Error("point dimension mismatch");
    double xn2 = 0.0;
    for (double c : x) xn2 += c * c;
    const double xn = std::sqrt(xn2);
    const double w = width;

    const double surface[3] = {2.0, 2.0 * M_PI, 4.0 * M_PI};
    const double lhs = std::pow(2.0 * M_PI, -0.5 * d) * std::pow(w, d) * surface[d - 1] *
                       fourier_side_radial(alpha, d, w, xn);
    const double rhs = riesz_side(alpha, d, w, xn);

    RieszIdentityReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    const double c_a = riesz_constant(alpha, d);
    rep.ratio = lhs / (c_a * rhs);
    const double kappa = std::pow(2.0 * M_PI, -0.5 * d);
    rep.residual = std::abs(lhs - kappa * c_a * rhs) / std::abs(kappa * c_a * rhs);
    return rep;
}

double riesz_identity_residual(double alpha, int d, double width,
                               const std::vector<double>& x) {
    return riesz_identity_check(alpha, d, width, x).residual;
}

void write_resolvent_csv(const ResolventParams& rp, const std::vector<Offset>& xs,
                         const std::vector<double>& values, double tol,
                         const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path);
    f << "# d=" << rp.lap.d << " alpha=" << fmt17(rp.lap.alpha)
      << " mass=" << fmt17(rp.mass) << " method=fourier tol=" << fmt17(tol) << "\n";
    for (size_t i = 0; i < xs.size(); ++i) {
        for (int c : xs[i]) f << c << ",";
        f << fmt17(values[i]) << "\n";
    }
}

}  // namespace fraclat
