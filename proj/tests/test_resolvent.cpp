#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fraclat/errors.hpp"
#include "fraclat/fit.hpp"
#include "fraclat/resolvent.hpp"
#include "fraclat/symbol.hpp"

using namespace fraclat;

namespace {

// Independent gamma oracle (Lanczos, g = 7) for cross-checking riesz_constant.
double lanczos_gamma(double z) {
    static const double c[9] = {0.99999999999980993, 676.5203681218851,
                                -1259.1392167224028, 771.32342877765313,
                                -176.61502916214059, 12.507343278686905,
                                -0.13857109526572012, 9.9843695780195716e-6,
                                1.5056327351493116e-7};
    if (z < 0.5)
        return M_PI / (std::sin(M_PI * z) * lanczos_gamma(1.0 - z));
    z -= 1.0;
    double a = c[0];
    const double t = z + 7.5;
    for (int i = 1; i < 9; ++i) a += c[i] / (z + i);
    return std::sqrt(2.0 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

}  // namespace

TEST_CASE("riesz constant") {
    CHECK(riesz_constant(0.5, 2) == doctest::Approx(1.0).epsilon(1e-14));  // alpha = d/4
    CHECK_THROWS_AS(riesz_constant(0.5, 1), AlphaTooLarge);
    CHECK_THROWS_AS(riesz_constant(1.0, 2), AlphaTooLarge);
    CHECK_THROWS_AS(riesz_constant(-0.1, 2), InvalidAlpha);
    for (auto [a, d] : {std::pair<double, int>{0.4, 1}, {0.3, 2}, {0.7, 3}, {0.25, 1}}) {
        const double ref = lanczos_gamma(0.5 * d - a) / lanczos_gamma(a) *
                           std::pow(2.0, 0.5 * d - 2.0 * a);
        CHECK(riesz_constant(a, d) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("resolvent positivity, symmetry and diagonal lower bound") {
    ResolventParams rp{{1, 0.5}, 1.0};
    KernelTable t = kernel_table({1, 0.5}, 40);
    const double m_a2 = 1.0 + t.at({0});
    const double g00 = resolvent_entry(rp, {0});
    CHECK(g00 >= 1.0 / m_a2);
    CHECK(g00 == doctest::Approx(0.484051295086).epsilon(1e-9));
    for (int x : {0, 1, 3, 10, 25}) {
        const double g = resolvent_entry(rp, {x});
        CHECK(g > 0.0);
        CHECK(g == resolvent_entry(rp, {-x}));
    }
    ResolventParams rp2{{2, 0.7}, 0.8};
    const double a = resolvent_entry(rp2, {3, 1});
    CHECK(a > 0.0);
    CHECK(a == doctest::Approx(resolvent_entry(rp2, {1, 3})).epsilon(1e-13));
    CHECK(a == doctest::Approx(resolvent_entry(rp2, {-3, 1})).epsilon(1e-13));
}

TEST_CASE("resolvent parameter validation") {
    CHECK_THROWS_AS(resolvent_entry({{1, 0.4}, 0.0}, {1}), InvalidMass);
    CHECK_THROWS_AS(resolvent_entry({{1, 0.4}, -1.0}, {1}), InvalidMass);
    ResolventParams bad{{1, 0.7}, 0.0};  // massless needs alpha < d/2
    CHECK_THROWS_AS(bad.validate(), AlphaTooLarge);
    CHECK_THROWS_AS(inverse_entry({1, 0.5}, {1}), AlphaTooLarge);
    CHECK_THROWS_AS(inverse_entry({2, 1.0}, {1, 0}), AlphaTooLarge);
}

TEST_CASE("mass monotonicity at fixed offset") {
    for (int x : {0, 2, 7}) {
        double prev = 1e300;
        for (double m : {0.5, 0.8, 1.2, 2.0, 3.0}) {
            const double g = resolvent_entry({{1, 0.5}, m}, {x});
            CHECK(g < prev);
            prev = g;
        }
    }
}

TEST_CASE("neumann partial sums") {
    ResolventParams rp{{1, 0.5}, 1.0};
    KernelTable t = kernel_table({1, 0.5}, 60);
    const double m_a2 = 1.0 + t.at({0});

    CHECK(neumann_partial(rp, {0}, 0, t) == doctest::Approx(1.0 / m_a2).epsilon(1e-14));
    CHECK(neumann_partial(rp, {3}, 0, t) == 0.0);
    CHECK(neumann_partial(rp, {2}, 1, t) ==
          doctest::Approx(std::abs(t.at({2})) / (m_a2 * m_a2)).epsilon(1e-14));

    const double g2 = resolvent_entry(rp, {2});
    double prev = -1.0;
    for (int n : {0, 1, 2, 3, 5, 8, 12}) {
        const double v = neumann_partial(rp, {2}, n, t);
        CHECK(v >= prev);
        CHECK(v <= g2 + 1e-9);
        prev = v;
    }
    CHECK(prev > 0.9 * g2);  // converging toward the quadrature value
}

TEST_CASE("neumann dense-matrix oracle") {
    // independent route: explicit dense operator on the window, powered by Eigen
    ResolventParams rp{{1, 0.4}, 1.1};
    const int radius = 24;
    KernelTable t = kernel_table({1, 0.4}, radius);
    const double m_a2 = rp.mass * rp.mass + t.at({0});
    const int n = 2 * radius + 1;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(i - j) <= radius) P(i, j) = std::abs(t.at({i - j}));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[radius] = 1.0;  // origin
    const int target = radius + 5;
    double expect = 0.0;
    for (int level = 0; level <= 6; ++level) {
        if (level > 0) v = (P * v / m_a2).eval();
        expect += v[target] / m_a2;
    }
    CHECK(neumann_partial(rp, {5}, 6, t) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("massive resolvent decay exponent within 3 percent") {
    for (double m : {0.5, 1.0, 2.0}) {
        std::vector<Offset> xs;
        std::vector<double> r;
        for (int k = 30; k <= 150; k += 2) {
            xs.push_back({k});
            r.push_back(double(k));
        }
        const double m2 = m * m;
        std::vector<Extrapolated> es = symbol_entry_batch(
            1, xs, 8192, 2.0, [m2](double f) { return 1.0 / (std::sqrt(f) + m2); });
        std::vector<double> v(es.size());
        for (size_t i = 0; i < es.size(); ++i) v[i] = es[i].value;
        PowerLawFit f = fit_power_law(r, v);
        CHECK(std::abs(f.exponent + 2.0) < 0.03 * 2.0);
    }
}

TEST_CASE("resolvent tail constants") {
    ResolventParams rp1{{1, 0.5}, 1.0};
    TailCheckReport r1 = resolvent_tail_check(rp1, 50, 200);
    CHECK(r1.relative_error < 0.05);
    CHECK(std::abs(r1.fitted_exponent + 2.0) < 0.03 * 2.0);

    ResolventParams rp2{{1, 0.5}, 2.0};
    TailCheckReport r2 = resolvent_tail_check(rp2, 50, 200);
    // constant_est folds in m^4, so the ratio checks the m^{-4} scaling
    CHECK(std::abs(r2.constant_est / r1.constant_est - 1.0) < 0.05);
}

TEST_CASE("inverse entries: positivity, decay, small-mass continuity") {
    FracLaplacianParams lap{1, 0.4};
    CHECK(inverse_entry(lap, {0}) > 0.0);
    CHECK(inverse_entry({1, 0.45}, {0}) > 0.0);  // alpha close to d/2 still finite

    // decay exponent -(d - 2 alpha) within 3%
    for (double a : {0.25, 0.4}) {
        std::vector<double> r, v;
        for (int k = 30; k <= 150; k += 4) {
            r.push_back(double(k));
            v.push_back(inverse_entry({1, a}, {k}));
        }
        PowerLawFit f = fit_power_law(r, v);
        const double target = -(1.0 - 2.0 * a);
        CHECK(std::abs(f.exponent - target) < 0.03 * std::abs(target));
    }

    // amplitude matches (2pi)^{-1/2} c_alpha (measured normalization)
    const double v200 = inverse_entry(lap, {200});
    const double expect = std::pow(2.0 * M_PI, -0.5) * riesz_constant(0.4, 1);
    CHECK(v200 * std::pow(200.0, 0.2) == doctest::Approx(expect).epsilon(1e-4));

    // d = 3: inverse agrees with the resolvent at m = 1e-3 within 1%
    const double i3 = inverse_entry({3, 0.4}, {10, 0, 0});
    const double r3 = resolvent_entry({{3, 0.4}, 1e-3}, {10, 0, 0});
    CHECK(std::abs(i3 - r3) / i3 < 0.01);
}

TEST_CASE("inverse decay in d = 2") {
    std::vector<double> r, v;
    for (int k = 8; k <= 30; k += 2) {
        r.push_back(double(k));
        v.push_back(inverse_entry({2, 0.5}, {k, 0}));
    }
    PowerLawFit f = fit_power_law(r, v);
    CHECK(std::abs(f.exponent + 1.0) < 0.03);
}

TEST_CASE("riesz identity residuals") {
    CHECK(riesz_identity_residual(0.25, 1, 1.0, {0.0}) < 1e-4);
    CHECK(riesz_identity_residual(0.25, 1, 1.0, {3.0}) < 1e-4);
    CHECK(riesz_identity_residual(0.5, 2, 1.0, {1.0, 1.0}) < 1e-3);

    // the measured convention factor (2pi)^{-d/2}, reported for the record
    for (int d : {1, 2, 3}) {
        std::vector<double> x(d, 0.0);
        x[0] = 1.0;
        RieszIdentityReport rep = riesz_identity_check(0.35 * d >= 0.5 * d ? 0.3 : 0.35 * d + 0.05, d, 1.0, x);
        CHECK(rep.ratio == doctest::Approx(std::pow(2.0 * M_PI, -0.5 * d)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(riesz_identity_check(0.5, 1, 1.0, {0.0}), AlphaTooLarge);
}

TEST_CASE("symbol grid invariants") {
    SymbolGrid g = SymbolGrid::make(64);
    for (int j = 0; j < g.n; ++j) {
        CHECK(g.f_axis[j] >= 0.0);
        CHECK(g.f_axis[j] <= 4.0);
        CHECK(g.k_axis[j] != 0.0);  // midpoint grid stays off the singularity
    }
    CHECK(symbol_f({0.0, 0.0}) == 0.0);
    CHECK(symbol_f({M_PI, M_PI}) == doctest::Approx(8.0));  // 4d at the corner
}
