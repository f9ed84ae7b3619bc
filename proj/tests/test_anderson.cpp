#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <filesystem>

#include "fraclat/anderson.hpp"
#include "fraclat/errors.hpp"
#include "fraclat/rng.hpp"

using namespace fraclat;
using cd = std::complex<double>;

namespace {
const DisorderSpec kUniform = DisorderSpec::uniform(1.0);
}

TEST_CASE("derived parameters") {
    CHECK(derived_params(0.5, 1.0, 1.0, 10.0, 1, 0.75).theta_s == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(derived_params(0.9, 1.0, 1.0, 10.0, 1, 0.5).alpha_s == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(derived_params(0.9, 1.0, 1.0, 10.0, 1, 0.5).gamma ==
          doctest::Approx(std::pow(10.0, 0.1)).epsilon(1e-14));
    CHECK_THROWS_AS(derived_params(1.1, 1.0, 1.0, 1.0, 1, 0.5), InvalidS);
    CHECK_THROWS_AS(derived_params(0.5, 1.0, 1.0, 1.0, 1, 0.5), InvalidS);  // boundary
    CHECK_THROWS_AS(derived_params(0.9, 0.8, 1.0, 1.0, 1, 0.5), InvalidS);  // s >= tau
}

TEST_CASE("uniform disorder sampling") {
    CHECK(kUniform.tau == 1.0);
    CHECK(kUniform.m_tau == 1.0);
    BoxGeometry box = BoxGeometry::cube(1, 50);
    std::vector<double> w1 = sample_disorder(kUniform, box, 123, 7);
    std::vector<double> w2 = sample_disorder(kUniform, box, 123, 7);
    std::vector<double> w3 = sample_disorder(kUniform, box, 123, 8);
    CHECK(w1 == w2);  // bitwise determinism
    CHECK(w1 != w3);
    for (double v : w1) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("empirical tau-constant of the uniform measure") {
    // max over a v-grid of P[v - delta, v + delta] / (2 delta) * 2 -> M_1 = 1
    const long n = 1000000;
    const double delta = 0.05;
    std::vector<long> hits(41, 0);  // v grid -1 .. 1 step 0.05
    for (long i = 0; i < n; ++i) {
        const double v = (2.0 * uniform01(substream(99, 0, uint64_t(i))) - 1.0);
        for (int g = 0; g <= 40; ++g) {
            const double center = -1.0 + 0.05 * g;
            if (std::abs(v - center) <= delta) ++hits[g];
        }
    }
    double m1_hat = 0.0;
    for (int g = 0; g <= 40; ++g)
        m1_hat = std::max(m1_hat, double(hits[g]) / n / delta);
    CHECK(std::abs(m1_hat - 1.0) < 0.05);
}

TEST_CASE("custom tabulated density") {
    DisorderSpec tri = DisorderSpec::custom({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0});
    CHECK(tri.tau == 1.0);
    CHECK(tri.density_bound == doctest::Approx(1.0));
    for (int i = 0; i < 200; ++i) {
        const double v = tri.sample(5, 0, uint64_t(i));
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    // decoupling integral stays below theta_s for the tabulated family too
    const double s = 0.6;
    const double theta = 1.0 / (1.0 - s) * std::pow(tri.m_tau, s);
    for (double eta : {-0.9, -0.3, 0.0, 0.4, 1.0})
        CHECK(decoupling_integral(tri, s, {eta, 0.0}) <= theta * (1.0 + 1e-9));
}

TEST_CASE("decoupling integral for the uniform measure") {
    // closed form for real eta in [-1,1]: ((1+eta)^{1-s} + (1-eta)^{1-s}) / (2(1-s))
    for (double s : {0.3, 0.5, 0.9}) {
        for (double eta : {-0.7, 0.0, 0.2, 0.95}) {
            const double closed = (std::pow(1.0 + eta, 1.0 - s) + std::pow(1.0 - eta, 1.0 - s)) /
                                  (2.0 * (1.0 - s));
            CHECK(decoupling_integral(kUniform, s, {eta, 0.0}) ==
                  doctest::Approx(closed).epsilon(1e-8));
            CHECK(closed <= 1.0 / (1.0 - s) + 1e-12);
        }
        // complex eta only shrinks the integral
        CHECK(decoupling_integral(kUniform, s, {0.0, 0.5}) <
              decoupling_integral(kUniform, s, {0.0, 0.0}));
    }
}

TEST_CASE("thresholds on the exact stencil") {
    KernelTable st = kernel_table({1, 1.0}, 8);
    const double s = 0.9;
    const double expect_am = std::pow(2.0 / 0.1 * (std::pow(2.0, 0.9) + 2.0), 1.0 / 0.9);
    CHECK(threshold_am(s, kUniform, st) == doctest::Approx(expect_am).epsilon(1e-12));

    SawKernel sd = saw_kernel_from_laplacian(st, s);
    const double expect_l0 = std::pow(10.0 * 2.0, 1.0 / 0.9);  // theta = 10, row sum 2
    CHECK(threshold_saw(s, kUniform, sd) == doctest::Approx(expect_l0).epsilon(1e-12));
    CHECK(threshold_saw(s, kUniform, sd) < threshold_am(s, kUniform, st));

    // beta = 0 collapses the weighted threshold onto the unweighted one
    CHECK(threshold_ag(s, 0.0, kUniform, st) ==
          doctest::Approx(threshold_am(s, kUniform, st)).epsilon(1e-13));
    CHECK_THROWS_AS(threshold_ag(s, s * 3.0 - 1.0, kUniform, st), BetaTooLarge);  // beta = 2 alpha_s
}

TEST_CASE("threshold chain is strictly ordered") {
    KernelTable k = kernel_table({1, 0.5}, 150);
    for (double s : {0.7, 0.8, 0.9}) {
        SawKernel d = saw_kernel_from_laplacian(k, s);
        const double beta = derived_params(s, 1.0, 1.0, 1.0, 1, 0.5).alpha_s;
        ThresholdReport rep = threshold_chain(s, beta, kUniform, k, d);
        CHECK(rep.lambda0 < rep.lambda_am);
        CHECK(rep.lambda_am < rep.lambda_ag);
        CHECK(rep.radius_bound_used > 0.0);
    }
    // approaching the summability boundary blows the sums up
    CHECK(threshold_am(0.51, kUniform, k) > 20.0 * threshold_am(0.7, kUniform, k));
}

TEST_CASE("optimize over s") {
    KernelTable k = kernel_table({1, 0.5}, 120);
    std::vector<double> coarse, fine;
    for (int i = 0; i < 20; ++i) coarse.push_back(0.55 + 0.4 * i / 19.0);
    for (int i = 0; i < 40; ++i) fine.push_back(0.55 + 0.4 * i / 39.0);
    DecayFit df = decay_constant_estimate(k, 30, 110);
    OptimizeResult oc = optimize_s(kUniform, k, coarse, df.c_est);
    OptimizeResult of = optimize_s(kUniform, k, fine, df.c_est);
    CHECK(std::abs(oc.s_star - of.s_star) <= 0.4 / 19.0 + 1e-12);  // one coarse cell
    CHECK(of.lambda0_star <= oc.lambda0_star + 1e-12);

    OptimizeResult single = optimize_s(kUniform, k, {0.8}, 0.0);
    CHECK(single.s_star == 0.8);
    CHECK_THROWS_AS(optimize_s(kUniform, k, {}, 0.0), EmptyGrid);

    // g < 1 at twice the optimized threshold
    CHECK(g_function(0.9, 2.0 * oc.lambda0_star, df.c_est, 0.5) < 1.0);
    for (auto [s, lg] : oc.g_thresholds) CHECK(g_function(s, lg * 1.01, df.c_est, 0.5) < 1.0);
}

TEST_CASE("hamiltonian assembly") {
    KernelTable st = kernel_table({1, 1.0}, 8);
    BoxGeometry box = BoxGeometry::cube(1, 2);
    ModelParams p{{1, 1.0}, kUniform, 1.0, 0.9, {0.5, 0.1}};
    std::vector<double> zero_omega(box.size(), 0.0);
    Eigen::MatrixXd H = build_hamiltonian(p, box, st, zero_omega);
    for (long i = 0; i < box.size(); ++i)
        for (long j = 0; j < box.size(); ++j) {
            const double expect = i == j ? 2.0 : (std::abs(i - j) == 1 ? -1.0 : 0.0);
            CHECK(H(i, j) == expect);
        }

    // free eigenvalues stay inside [0, (4d)^alpha]
    KernelTable k = kernel_table({1, 0.6}, 60);
    BoxGeometry box30 = BoxGeometry::cube(1, 30);
    ModelParams p6{{1, 0.6}, kUniform, 1.0, 0.9, {0.5, 0.1}};
    std::vector<double> zeros(box30.size(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        build_hamiltonian(p6, box30, k, zeros));
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    CHECK(es.eigenvalues().maxCoeff() < std::pow(4.0, 0.6) + 1e-10);

    // constant potential shifts the resolvent argument
    std::vector<double> ones(box30.size(), 1.0);
    Eigen::MatrixXd H0 = build_hamiltonian(p6, box30, k, zeros);
    Eigen::MatrixXd Hc = build_hamiltonian(p6, box30, k, ones);
    const cd z{0.5, 0.1};
    const cd a = greens_entry(Hc, z, 3, 7);
    const cd b = greens_entry(H0, z - p6.lambda, 3, 7);
    CHECK(std::abs(a - b) < 1e-10);

    KernelTable small = kernel_table({1, 0.6}, 10);
    CHECK_THROWS_AS(build_hamiltonian(p6, box30, small, zeros), RadiusTooSmall);
}

TEST_CASE("greens entries") {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(9, 9);
    const cd z{0.0, 1.0};
    CHECK(std::abs(greens_entry(H, z, 4, 4) - cd(0.0, 1.0)) < 1e-14);  // 1/(0 - i) = i
    CHECK(std::abs(greens_entry(H, z, 2, 5)) < 1e-14);

    KernelTable k = kernel_table({1, 0.5}, 40);
    BoxGeometry box = BoxGeometry::cube(1, 20);
    ModelParams p{{1, 0.5}, kUniform, 2.0, 0.9, {0.5, 0.1}};
    Eigen::MatrixXd Hd = build_hamiltonian(p, box, k, sample_disorder(kUniform, box, 3, 0));
    GreensSolver solver(Hd, p.z);
    for (auto [x, y] : {std::pair<long, long>{5, 9}, {0, 40}, {17, 17}}) {
        const cd g = solver.entry(x, y);
        CHECK(std::abs(g) <= 1.0 / 0.1 + 1e-9);                 // resolvent norm bound
        CHECK(std::abs(g - solver.entry(y, x)) < 1e-10);        // symmetric, not conjugated
    }
}

TEST_CASE("fractional moment mc: determinism and the a-priori ceiling") {
    KernelTable k = kernel_table({1, 0.5}, 40);
    BoxGeometry box = BoxGeometry::cube(1, 20);
    ModelParams p{{1, 0.5}, kUniform, 30.0, 0.9, {0.5, 0.1}};
    std::vector<std::pair<Offset, Offset>> pairs{{{0}, {0}}, {{0}, {3}}, {{0}, {9}}};

    omp_set_num_threads(1);
    auto mc1 = fractional_moment_mc(p, box, k, pairs, 200, 2024);
    omp_set_num_threads(2);
    auto mc2 = fractional_moment_mc(p, box, k, pairs, 200, 2024);
    omp_set_num_threads(1);
    auto mc3 = fractional_moment_mc(p, box, k, pairs, 200, 2025);
    for (size_t i = 0; i < pairs.size(); ++i) {
        CHECK(mc1[i].mean == mc2[i].mean);  // bitwise across thread counts
        CHECK(mc1[i].std_error == mc2[i].std_error);
        CHECK(mc1[i].median_of_means == mc2[i].median_of_means);
        CHECK(mc1[i].mean != mc3[i].mean);  // seed actually matters
    }

    // large lambda: diagonal moment approaches theta_s / lambda^s from below
    ModelParams ph{{1, 0.5}, kUniform, 1e4, 0.6, {0.5, 0.1}};
    auto mch = fractional_moment_mc(ph, box, k, {{{0}, {0}}}, 400, 7);
    const double bound = (1.0 / (1.0 - 0.6)) / std::pow(1e4, 0.6);
    CHECK(mch[0].mean <= 1.1 * bound);
    CHECK(mch[0].mean >= 0.3 * bound);
    CHECK(mch[0].median_of_means > 0.0);
    CHECK(mch[0].discarded == 0);

    CHECK_THROWS_AS(fractional_moment_mc(p, box, k, pairs, 50, 1), Error);
}

TEST_CASE("mc csv round trip") {
    KernelTable k = kernel_table({1, 0.5}, 24);
    BoxGeometry box = BoxGeometry::cube(1, 12);
    ModelParams p{{1, 0.5}, kUniform, 20.0, 0.8, {0.5, 0.1}};
    auto mc = fractional_moment_mc(p, box, k, {{{0}, {2}}, {{0}, {5}}}, 120, 11);
    const std::string dir =
        (std::filesystem::temp_directory_path() / "fraclat_and_test").string();
    std::filesystem::create_directories(dir);
    write_mc_csv(mc, dir + "/mc.csv");
    auto back = read_mc_csv(1, dir + "/mc.csv");
    REQUIRE(back.size() == mc.size());
    for (size_t i = 0; i < mc.size(); ++i) {
        CHECK(back[i].x == mc[i].x);
        CHECK(back[i].mean == mc[i].mean);  // 17 digits survive bit-exactly
        CHECK(back[i].std_error == mc[i].std_error);
        CHECK(back[i].n_samples == mc[i].n_samples);
        CHECK(back[i].master_seed == mc[i].master_seed);
    }
}

TEST_CASE("a-priori report") {
    KernelTable k = kernel_table({1, 0.5}, 20);
    BoxGeometry box = BoxGeometry::cube(1, 10);
    ModelParams base{{1, 0.5}, kUniform, 5.0, 0.55, {0.5, 0.1}};
    AprioriReport rep = apriori_check(base, box, k, {2.0, 8.0}, {0.3, 0.6},
                                      {cd(0.0, 0.1), cd(-1.0, 0.5)}, 800, 31);
    CHECK(rep.all_pass);
    CHECK(rep.rows.size() == 8);
    CHECK(rep.quadrature_max <= rep.quadrature_bound * (1.0 + 1e-9));
    CHECK(rep.quadrature_max == doctest::Approx(rep.quadrature_bound).epsilon(1e-6));
    CHECK_THROWS_AS(apriori_check(base, box, k, {2.0}, {1.2}, {cd(0, 0.1)}, 200, 1),
                    InvalidS);
}

TEST_CASE("saw bound check on a small system") {
    const double alpha = 0.5, s = 0.9;
    KernelTable k = kernel_table({1, alpha}, 80);
    SawKernel d = saw_kernel_from_laplacian(k, s);
    const double lambda0 = threshold_saw(s, kUniform, d);
    ModelParams p{{1, alpha}, kUniform, 3.0 * lambda0, s, {0.5, 0.1}};
    DerivedParams dp = derived_params(s, 1.0, 1.0, p.lambda, 1, alpha);

    BoxGeometry box = BoxGeometry::cube(1, 40);
    std::vector<std::pair<Offset, Offset>> pairs{{{0}, {2}}, {{0}, {4}}, {{0}, {8}}};
    auto mc = fractional_moment_mc(p, box, k, pairs, 400, 451);

    SawEnumeration e = enumerate_saws(d, 5, 24, 400000000);
    std::vector<TwoPointValue> tp;
    for (auto& pr : pairs) tp.push_back(two_point_from(e, d, dp.gamma, pr.second));

    DecayBoundReport db = decay_bound_check(d, dp.gamma, d.decay_a, 2, 16, 4, 24);
    SawBoundReport rep = saw_bound_check(p, mc, tp, dp.gamma, db.k0);
    CHECK(rep.all_pass);
    for (const auto& row : rep.rows) {
        CHECK(row.pass_saw);
        CHECK(row.pass_power);
        CHECK(row.saw_rhs > 0.0);
    }
}

TEST_CASE("eigen decay analysis") {
    KernelTable k = kernel_table({1, 0.5}, 120);
    BoxGeometry box = BoxGeometry::cube(1, 60);
    // diagonal-dominant limit: every eigenvector is essentially a delta
    ModelParams ph{{1, 0.5}, kUniform, 1e4, 0.9, {0.5, 0.1}};
    EigenDecayReport rep =
        eigen_decay_analysis(ph, box, k, sample_disorder(kUniform, box, 8, 0), 0.3);
    CHECK(rep.fraction_passing > 0.98);
    CHECK(rep.median_t >= rep.threshold_t);

    // delocalized negative control: free laplacian plus tiny disorder
    KernelTable st = kernel_table({1, 1.0}, 120);
    ModelParams pf{{1, 1.0}, kUniform, 0.01, 0.9, {0.5, 0.1}};
    EigenDecayReport neg =
        eigen_decay_analysis(pf, box, st, sample_disorder(kUniform, box, 8, 0), 0.3);
    CHECK(neg.median_t < 0.2);
}

TEST_CASE("dynamical moment") {
    KernelTable k = kernel_table({1, 0.75}, 80);
    BoxGeometry box = BoxGeometry::cube(1, 40);
    ModelParams p{{1, 0.75}, kUniform, 50.0, 0.9, {0.5, 0.1}};
    std::vector<double> omega = sample_disorder(kUniform, box, 17, 0);

    DynamicalMomentResult t0 = dynamical_moment(p, box, k, omega, 1.0, {0.0});
    CHECK(t0.max_moment < 1e-20);  // the propagator at t = 0 is the identity

    DynamicalMomentResult dm =
        dynamical_moment(p, box, k, omega, 1.0, {0.1, 1.0, 10.0, 100.0, 1000.0});
    CHECK(dm.max_moment < 1.0);     // strong disorder keeps the moment small
    CHECK(dm.boundary_mass < 1e-6);
    CHECK_THROWS_AS(dynamical_moment(p, box, k, omega, 1.6, {1.0}), Error);  // beta >= 2 alpha
}
