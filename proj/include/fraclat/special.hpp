#pragma once

#include <vector>

#include "fraclat/lattice.hpp"

namespace fraclat {

// Exponentially scaled modified Bessel function e^{-2t} I_p(2t).
// Total on p in Z, t >= 0; never forms the unscaled I_p (overflows past
// t ~ 350). Small arguments use a normalized downward Miller recurrence,
// large arguments the integral (1/pi) int_0^pi e^{-2t(1-cos u)} cos(pu) du.
double scaled_bessel_i(int p, double t);

// Scaled values for all orders 0..p_max at the same argument.
std::vector<double> scaled_bessel_row(int p_max, double t);

// Lattice heat kernel e^{t Delta}(0,x) = prod_j e^{-2t} I_{x_j}(2t), t > 0.
double heat_kernel(const Offset& x, double t);

// |Gamma(-alpha)| = Gamma(1-alpha)/alpha for alpha in (0,1).
double abs_gamma_neg_alpha(double alpha);

// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace fraclat
