#pragma once

#include <string>
#include <vector>

#include "fraclat/laplacian.hpp"

namespace fraclat {

// Nonnegative step-weight kernel D(0,x) for the self-avoiding walk, stored on
// |x|_inf <= truncation_radius with the weight at the origin identically 0.
struct SawKernel {
    int d = 1;
    int truncation_radius = 0;
    std::vector<double> weights;  // row-major over box_offsets(d, radius)
    double row_sum = 0.0;         // sum of stored weights
    double row_sum_tail = 0.0;    // certified bound on the mass beyond the radius
    double decay_a = 0.0;         // D(0,x) <= upper_const / |x|^{d + decay_a}
    double upper_const = 0.0;
    std::string provenance;

    long index_of(const Offset& x) const;
    double at(const Offset& x) const { return weights[index_of(x)]; }
    double rho_upper() const { return row_sum + row_sum_tail; }
};

// D(x,y) = |(-Delta)^alpha(x,y)|^s. Requires s (d + 2 alpha) > d so the row
// sum converges (SubcriticalS otherwise).
SawKernel saw_kernel_from_laplacian(const KernelTable& table, double s);

// Arbitrary kernel from explicit weights (tests, random kernels).
SawKernel make_saw_kernel(int d, int radius,
                          const std::vector<std::pair<Offset, double>>& weights,
                          double decay_a, const std::string& provenance = "custom");

struct WalkCounts {
    Offset target;
    std::vector<double> counts;  // c_0(x) .. c_{n_max}(x)
    int window_radius = 0;
};

// Exhaustive weighted SAW counts on the window |site|_inf <= window_radius,
// one DFS shared by every endpoint. Steps are scanned in descending weight;
// first-step subtrees reduce in fixed order, so results are bitwise
// reproducible under any thread count.
struct SawEnumeration {
    int d = 0;
    int n_max = 0;
    int window_radius = 0;
    std::vector<Offset> sites;
    std::vector<std::vector<double>> counts;  // [site][n]
    long nodes_visited = 0;

    const std::vector<double>& counts_at(const Offset& x) const;
    std::vector<double> level_sums() const;  // sum_x c_n(x) per n
};

SawEnumeration enumerate_saws(const SawKernel& kernel, int n_max, int window_radius,
                              long node_budget = 50000000, int exact_cap = 6);

WalkCounts saw_counts(const SawKernel& kernel, const Offset& x, int n_max,
                      int window_radius, long node_budget = 50000000);

// Generating-function convention: the weight of an n-step walk is
// gamma^n prod D(w_j, w_{j+1}) with the raw kernel D. Literature that uses
// normalized transition probabilities is recovered by gamma -> gamma/row_sum.
struct TwoPointValue {
    double gamma = 0.0;
    double value = 0.0;  // sum_{n <= n_max} c_n(x) gamma^n
    int n_max = 0;
    double tail_estimate = 0.0;      // (gamma rho)^{n_max+1} / (1 - gamma rho), inf if supercritical
    double window_loss_bound = 0.0;  // certified bound on mass omitted by confinement
    bool certified() const;
    double upper() const { return value + tail_estimate + window_loss_bound; }
};

TwoPointValue two_point(const SawKernel& kernel, double gamma, const Offset& x,
                        int n_max, int window_radius, long node_budget = 50000000);

// Same partial sums over a precomputed enumeration (no re-walk).
TwoPointValue two_point_from(const SawEnumeration& e, const SawKernel& kernel,
                             double gamma, const Offset& x);

// R_chi >= 1 / sum_{z != 0} D(0,z); uses the tail-inflated row sum, so the
// returned radius is a certified lower bound.
double radius_lower_bound(const SawKernel& kernel);

// chi partial sum: sum_n gamma^n sum_x c_n(x), same tail bookkeeping.
TwoPointValue susceptibility_partial(const SawKernel& kernel, double gamma, int n_max,
                                     int window_radius, long node_budget = 50000000);

// c(x) = sum_{|u| <= |x|/3 <= |v|} C_gamma(u) gamma D(u,v); ell-tilde is the
// smallest sampled radius from which c stays below 2^{-(d+a)} / 2.
int ell_tilde_estimate(const SawKernel& kernel, double gamma, double a, double C,
                       int search_cap, int n_max = 5, int window_radius = 0,
                       long node_budget = 50000000);

double k0_constant(double ell_tilde, double chi, double gamma, double C, int d, double a);

struct DecayBoundReport {
    double k0 = 0.0;
    int ell_tilde = 0;
    double chi_upper = 0.0;
    double window_loss = 0.0;  // reported confinement bound, not folded into ratios
    double max_ratio = 0.0;  // max over window of C_gamma(x) |x|^{d+a} / K0
    bool pass = false;
    std::vector<std::pair<double, double>> per_radius;  // (|x|, ratio)
};

DecayBoundReport decay_bound_check(const SawKernel& kernel, double gamma, double a,
                                   int r_min, int r_max, int n_max = 6,
                                   int window_radius = 0, long node_budget = 50000000,
                                   double tolerance = 1e-9);

void write_counts_csv(const SawEnumeration& e, const std::string& path);
void write_two_point_csv(const SawKernel& kernel, const SawEnumeration& e, double gamma,
                         const std::string& path);

}  // namespace fraclat
