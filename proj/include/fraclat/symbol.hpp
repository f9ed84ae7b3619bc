#pragma once

#include <functional>
#include <vector>

#include "fraclat/lattice.hpp"

namespace fraclat {

// Dispersion f(k) = sum_j 2(1 - cos k_j) of the discrete Laplacian.
double symbol_f(const std::vector<double>& k);

// Per-axis values 2(1 - cos k_j) on the shifted midpoint grid
// k_j = -pi + (j+1/2) 2pi/N, which never contains k = 0 for even N.
struct SymbolGrid {
    int n = 0;
    std::vector<double> f_axis;   // 2(1 - cos k_j)
    std::vector<double> k_axis;   // grid points
    static SymbolGrid make(int n);
};

// N^{-d} sum over the midpoint grid of g(f(k)) prod_j cos(x_j k_j);
// approximates (2pi)^{-d} int g(f) e^{ix.k} dk with sign-alternating
// aliasing error ~ N^{-p}.
double symbol_grid_sum(int d, const Offset& x, int N,
                       const std::function<double(double)>& g);

// Two-level Richardson extrapolation from values at N, 2N, 4N with known
// leading error exponent p (next order p + 2).
struct Extrapolated {
    double value = 0.0;
    double tol = 0.0;
};
Extrapolated richardson3(double v1, double v2, double v3, double p);

// Extrapolated midpoint-grid entry with base grid n0.
Extrapolated symbol_entry(int d, const Offset& x, int n0, double p,
                          const std::function<double(double)>& g);

// Default base grid per dimension; a positive override must be >= 16 and is
// rounded up to even so the grid stays off k = 0.
int fourier_base_n(int d, int resolution_override);

// Batched extrapolated entries sharing one g(f) evaluation pass per grid.
std::vector<Extrapolated> symbol_entry_batch(int d, const std::vector<Offset>& xs,
                                             int n0, double p,
                                             const std::function<double(double)>& g);

}  // namespace fraclat
