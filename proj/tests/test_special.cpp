#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fraclat/special.hpp"

using namespace fraclat;

namespace {

// Independent oracle: truncated power series of e^{-2t} I_p(2t),
// sum_q t^{2q+p} / (q! (q+p)!). Thirty terms are ample for t <= 5.
double series_scaled_bessel(int p, double t, int terms = 30) {
    p = std::abs(p);
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k <= p; ++k) term *= t / k;  // t^p / p!
    for (int q = 0; q < terms; ++q) {
        sum += term;
        term *= t * t / ((q + 1.0) * (q + p + 1.0));
    }
    return sum * std::exp(-2.0 * t);
}

}  // namespace

TEST_CASE("scaled bessel at t = 0") {
    CHECK(scaled_bessel_i(0, 0.0) == 1.0);
    CHECK(scaled_bessel_i(3, 0.0) == 0.0);
    CHECK(scaled_bessel_i(-2, 0.0) == 0.0);
}

TEST_CASE("scaled bessel matches the series oracle for small arguments") {
    CHECK(scaled_bessel_i(0, 1.0) == doctest::Approx(series_scaled_bessel(0, 1.0)).epsilon(1e-14));
    for (double t : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
        for (int p = 0; p <= 12; ++p) {
            const double ref = series_scaled_bessel(p, t);
            const double got = scaled_bessel_i(p, t);
            CHECK(got == doctest::Approx(ref).epsilon(1e-13));
        }
    }
}

TEST_CASE("negative order equals positive order") {
    for (double t : {0.3, 2.0, 70.0}) {
        CHECK(scaled_bessel_i(-4, t) == scaled_bessel_i(4, t));
    }
}

TEST_CASE("row sums to one on both evaluation branches") {
    // sum_{p in Z} e^{-z} I_p(z) = 1; the tail beyond p_max is negligible
    for (double t : {1.0, 50.0, 150.0, 300.0, 900.0}) {
        const int pmax = int(2.0 * t + 10.0 * std::sqrt(2.0 * t) + 60.0);
        std::vector<double> row = scaled_bessel_row(pmax, t);
        double sum = row[0];
        for (int p = 1; p <= pmax; ++p) sum += 2.0 * row[p];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("large-argument branch matches the uniform asymptotic expansion") {
    // e^{-z} I_0(z) ~ (2 pi z)^{-1/2} (1 + 1/(8z) + 9/(128 z^2))
    for (double z : {1000.0, 5000.0, 40000.0}) {
        const double asym =
            (1.0 + 1.0 / (8.0 * z) + 9.0 / (128.0 * z * z)) / std::sqrt(2.0 * M_PI * z);
        CHECK(scaled_bessel_i(0, 0.5 * z) == doctest::Approx(asym).epsilon(5e-7));
    }
}

TEST_CASE("row accessor agrees with single-order evaluation") {
    for (double t : {0.7, 90.0, 400.0}) {
        std::vector<double> row = scaled_bessel_row(8, t);
        for (int p = 0; p <= 8; ++p) CHECK(row[p] == doctest::Approx(scaled_bessel_i(p, t)).epsilon(1e-13));
    }
}

TEST_CASE("heat kernel basics") {
    CHECK(heat_kernel(Offset{0}, 1e-9) == doctest::Approx(1.0).epsilon(1e-7));
    const double s = scaled_bessel_i(1, 0.5);
    CHECK(heat_kernel(Offset{1, 1}, 0.5) == doctest::Approx(s * s).epsilon(1e-15));
    CHECK(heat_kernel(Offset{2, -2, 1}, 0.3) > 0.0);
}

TEST_CASE("heat kernel window sums to one") {
    // d = 1, t = 1, window [-50, 50]
    std::vector<double> row = scaled_bessel_row(50, 1.0);
    double sum = row[0];
    for (int p = 1; p <= 50; ++p) sum += 2.0 * row[p];
    CHECK(std::abs(sum - 1.0) < 1e-12);

    for (double t : {0.1, 1.0, 10.0}) {
        const int w = int(10.0 * std::sqrt(t) + 50.0);
        std::vector<double> r = scaled_bessel_row(w, t);
        double axis = r[0];
        for (int p = 1; p <= w; ++p) axis += 2.0 * r[p];
        CHECK(std::abs(axis - 1.0) < 1e-10);          // d = 1
        CHECK(std::abs(axis * axis - 1.0) < 2e-10);   // d = 2 by the product structure
    }
}

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
    std::vector<double> x, w;
    gauss_legendre(8, x, w);
    double v = 0.0;
    for (int i = 0; i < 8; ++i) v += w[i] * std::pow(x[i], 8);
    CHECK(v == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("abs gamma of negative alpha") {
    // |Gamma(-1/2)| = 2 sqrt(pi)
    CHECK(abs_gamma_neg_alpha(0.5) == doctest::Approx(2.0 * std::sqrt(M_PI)).epsilon(1e-14));
}
