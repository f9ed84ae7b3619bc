#pragma once

#include <vector>

namespace fraclat {

// Ordinary least squares y = intercept + slope * x with residual diagnostics.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double residual_var = 0.0;
    int n = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Power-law fit |y| = c * r^exponent through log-log least squares.
// Throws FitUnstable when fewer than min_points samples survive (y must be
// nonzero) or the residual variance exceeds max_residual_var.
struct PowerLawFit {
    double c = 0.0;         // amplitude
    double exponent = 0.0;  // signed exponent (negative for decay)
    double residual_var = 0.0;
    int n = 0;
};

PowerLawFit fit_power_law(const std::vector<double>& r, const std::vector<double>& y,
                          int min_points = 8, double max_residual_var = 0.05);

}  // namespace fraclat
