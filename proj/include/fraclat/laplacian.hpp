#pragma once

#include <string>
#include <vector>

#include "fraclat/lattice.hpp"
#include "fraclat/quadrature.hpp"

namespace fraclat {

struct FracLaplacianParams {
    int d = 1;
    double alpha = 0.5;  // (0,1]; alpha = 1 degenerates to the nearest-neighbor stencil
    void validate() const;
};

// Truncated translation-invariant kernel of (-Delta)^alpha over the box
// |x|_inf <= radius. Values are stored for every offset; construction
// computes one entry per symmetry orbit.
struct KernelTable {
    FracLaplacianParams params;
    int radius = 0;
    std::vector<double> values;  // row-major over box_offsets(d, radius)
    double tail_bound = 0.0;     // bound on sum_{|x|_inf > radius} |K(x)|
    double quad_tol = 0.0;
    std::string method;

    long index_of(const Offset& x) const;  // throws RadiusTooSmall outside the box
    double at(const Offset& x) const { return values[index_of(x)]; }
    bool contains(const Offset& x) const { return norm_inf(x) <= radius; }
};

// Matrix element (-Delta)^alpha(0,x) by the method selected in quad.
double frac_laplacian_entry(const FracLaplacianParams& params, const Offset& x,
                            const QuadratureSpec& quad = {});

// Same entry with the per-method error report (Fourier: Richardson delta,
// Bochner: accumulated adaptive estimate).
struct EntryResult {
    double value = 0.0;
    double tol = 0.0;
};
EntryResult frac_laplacian_entry_checked(const FracLaplacianParams& params, const Offset& x,
                                         const QuadratureSpec& quad = {});

KernelTable kernel_table(const FracLaplacianParams& params, int radius,
                         const QuadratureSpec& quad = {});

// Row-sum identity residual K(0) + sum_{x != 0} K(x), corrected by the fitted
// power-law estimate of the mass beyond the truncation radius.
double row_sum_residual(const KernelTable& table, double tail_tolerance = 5e-2);

struct DecayFit {
    double c_est = 0.0;         // fitted amplitude of |K(x)| ~ c/|x|^{d+2a}
    double exponent_est = 0.0;  // fitted signed exponent
    double upper_const = 0.0;   // max over window of |K(x)| * |x|^{d+2a}
    double residual_var = 0.0;
    int n = 0;
};

// Log-log fit of |K| against |x|_2 over r_min <= |x|_2 <= r_max.
DecayFit decay_constant_estimate(const KernelTable& table, double r_min, double r_max);

// |(-Delta)^alpha(x,0)| for each alpha; probes the alpha -> 0 and alpha -> 1
// endpoint limits.
std::vector<double> limit_probe(const Offset& x, int d, const std::vector<double>& alphas,
                                const QuadratureSpec& quad = {});

// Bound on sum_{|x|_inf > radius} |x|_2^{-p} by shell counting and integral
// comparison (d <= 3).
double lattice_tail_sum_bound(int d, int radius, double p);

// Accurate estimate of the same sum (exact shells + continuum remainder).
double lattice_tail_sum_estimate(int d, int radius, double p);

// CSV / JSON emission per the external interface conventions.
void write_kernel_csv(const KernelTable& table, const std::string& path);
void write_kernel_json_summary(const KernelTable& table, const std::string& path);
KernelTable read_kernel_csv(const std::string& path);

}  // namespace fraclat
