#include "fraclat/fit.hpp"

#include <cmath>

#include "fraclat/errors.hpp"

namespace fraclat {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    LinearFit f;
    f.n = int(x.size());
    if (f.n < 2 || x.size() != y.size()) throw FitUnstable("linear_fit: need >= 2 points");
    double sx = 0, sy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / f.n, my = sy / f.n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw FitUnstable("linear_fit: degenerate abscissae");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (int i = 0; i < f.n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.residual_var = f.n > 2 ? ss / (f.n - 2) : 0.0;
    f.slope_stderr = f.n > 2 ? std::sqrt(f.residual_var / sxx) : 0.0;
    return f;
}

PowerLawFit fit_power_law(const std::vector<double>& r, const std::vector<double>& y,
                          int min_points, double max_residual_var) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < r.size(); ++i) {
        if (r[i] > 0.0 && y[i] != 0.0 && std::isfinite(y[i])) {
            lx.push_back(std::log(r[i]));
            ly.push_back(std::log(std::abs(y[i])));
        }
    }
    if (int(lx.size()) < min_points)
        throw FitUnstable("fit_power_law: only " + std::to_string(lx.size()) +
                          " usable samples");
    LinearFit lf = linear_fit(lx, ly);
    if (lf.residual_var > max_residual_var)
        throw FitUnstable("fit_power_law: residual variance " +
                          std::to_string(lf.residual_var));
    PowerLawFit f;
    f.c = std::exp(lf.intercept);
    f.exponent = lf.slope;
    f.residual_var = lf.residual_var;
    f.n = lf.n;
    return f;
}

}  // namespace fraclat
