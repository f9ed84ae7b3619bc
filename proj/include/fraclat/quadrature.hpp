#pragma once

#include <functional>

namespace fraclat {

enum class QuadMethod { bochner_bessel, fourier_grid };

// Discretization knobs shared by the Bochner and Fourier kernel routes.
// resolution: Fourier base grid points per axis (0 = per-dimension default);
//             Bochner max integrand evaluations per sub-integral.
// split_point: Bochner split T between [0,T] and [T,inf); 0 = automatic
//              max(1, |x|_1 / 2d).
// tail_terms: terms of the small-t expansion of 1 - e^{-2dt} I_0(2t)^d.
struct QuadratureSpec {
    QuadMethod method = QuadMethod::bochner_bessel;
    int resolution = 0;
    double split_point = 0.0;
    int tail_terms = 3;
    double rel_tol = 1e-11;
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evals = 0;
    bool converged = false;
};

// Globally adaptive 15-point Gauss-Kronrod integration of f on [a,b].
// Splits the worst panel until the summed error estimate drops below
// max(abs_tol, rel_tol * |integral|) or the evaluation budget runs out.
QuadResult adaptive_gk15(const std::function<double(double)>& f, double a, double b,
                         double rel_tol, double abs_tol = 0.0, long max_evals = 200000);

}  // namespace fraclat
