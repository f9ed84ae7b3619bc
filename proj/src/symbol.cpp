#include "fraclat/symbol.hpp"

#include <cmath>

#include "fraclat/errors.hpp"

namespace fraclat {

int fourier_base_n(int d, int resolution_override) {
    if (resolution_override > 0) {
        if (resolution_override < 16)
            throw QuadratureDivergence("fourier resolution < 16");
        return resolution_override + (resolution_override % 2);
    }
    switch (d) {
        case 1: return 8192;
        case 2: return 512;
        default: return 64;
    }
}

double symbol_f(const std::vector<double>& k) {
    double s = 0.0;
    for (double kj : k) s += 2.0 * (1.0 - std::cos(kj));
    return s;
}

SymbolGrid SymbolGrid::make(int n) {
    SymbolGrid g;
    g.n = n;
    g.f_axis.resize(n);
    g.k_axis.resize(n);
    const double h = 2.0 * M_PI / n;
    for (int j = 0; j < n; ++j) {
        g.k_axis[j] = -M_PI + (j + 0.5) * h;
        g.f_axis[j] = 2.0 * (1.0 - std::cos(g.k_axis[j]));
    }
    return g;
}

double symbol_grid_sum(int d, const Offset& x, int N,
                       const std::function<double(double)>& g) {
    SymbolGrid grid = SymbolGrid::make(N);
    std::vector<double> cx[3];
    for (int ax = 0; ax < d; ++ax) {
        cx[ax].resize(N);
        for (int j = 0; j < N; ++j) cx[ax][j] = std::cos(x[ax] * grid.k_axis[j]);
    }
    double sum = 0.0;
    if (d == 1) {
        for (int j = 0; j < N; ++j) sum += g(grid.f_axis[j]) * cx[0][j];
    } else if (d == 2) {
        for (int j1 = 0; j1 < N; ++j1) {
            double inner = 0.0;
            for (int j2 = 0; j2 < N; ++j2) inner += g(grid.f_axis[j1] + grid.f_axis[j2]) * cx[1][j2];
            sum += inner * cx[0][j1];
        }
    } else {
        for (int j1 = 0; j1 < N; ++j1)
            for (int j2 = 0; j2 < N; ++j2) {
                const double f12 = grid.f_axis[j1] + grid.f_axis[j2];
                double inner = 0.0;
                for (int j3 = 0; j3 < N; ++j3) inner += g(f12 + grid.f_axis[j3]) * cx[2][j3];
                sum += inner * cx[0][j1] * cx[1][j2];
            }
    }
    return sum / std::pow(double(N), d);
}

Extrapolated richardson3(double v1, double v2, double v3, double p) {
    const double f1 = std::pow(2.0, p) - 1.0;
    const double r1 = v2 + (v2 - v1) / f1;
    const double r2 = v3 + (v3 - v2) / f1;
    const double f2 = std::pow(2.0, p + 2.0) - 1.0;
    Extrapolated out;
    out.value = r2 + (r2 - r1) / f2;
    out.tol = std::abs(r2 - r1) + 4e-16 * std::abs(out.value);
    return out;
}

Extrapolated symbol_entry(int d, const Offset& x, int n0, double p,
                          const std::function<double(double)>& g) {
    const double v1 = symbol_grid_sum(d, x, n0, g);
    const double v2 = symbol_grid_sum(d, x, 2 * n0, g);
    const double v3 = symbol_grid_sum(d, x, 4 * n0, g);
    return richardson3(v1, v2, v3, p);
}

namespace {

// one grid pass, g(f) cached, all requested offsets accumulated together
std::vector<double> grid_sums_shared(int d, const std::vector<Offset>& xs, int N,
                                     const std::function<double(double)>& g) {
    SymbolGrid grid = SymbolGrid::make(N);
    std::vector<double> out(xs.size(), 0.0);
    if (d == 1) {
        std::vector<double> gv(N);
        for (int j = 0; j < N; ++j) gv[j] = g(grid.f_axis[j]);
        for (size_t i = 0; i < xs.size(); ++i) {
            double s = 0.0;
            for (int j = 0; j < N; ++j) s += gv[j] * std::cos(xs[i][0] * grid.k_axis[j]);
            out[i] = s / N;
        }
        return out;
    }
    for (size_t i = 0; i < xs.size(); ++i) out[i] = symbol_grid_sum(d, xs[i], N, g);
    return out;
}

}  // namespace

std::vector<Extrapolated> symbol_entry_batch(int d, const std::vector<Offset>& xs,
                                             int n0, double p,
                                             const std::function<double(double)>& g) {
    const std::vector<double> v1 = grid_sums_shared(d, xs, n0, g);
    const std::vector<double> v2 = grid_sums_shared(d, xs, 2 * n0, g);
    const std::vector<double> v3 = grid_sums_shared(d, xs, 4 * n0, g);
    std::vector<Extrapolated> out(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) out[i] = richardson3(v1[i], v2[i], v3[i], p);
    return out;
}

}  // namespace fraclat
