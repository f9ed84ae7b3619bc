#include "fraclat/saw.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>

#include "fraclat/errors.hpp"
#include "fraclat/io.hpp"

namespace fraclat {

long SawKernel::index_of(const Offset& x) const {
    long idx = 0;
    const long side = 2L * truncation_radius + 1;
    for (int j = 0; j < d; ++j) {
        if (std::abs(x[j]) > truncation_radius)
            throw RadiusTooSmall("offset outside saw kernel radius");
        idx = idx * side + (x[j] + truncation_radius);
    }
    return idx;
}

SawKernel saw_kernel_from_laplacian(const KernelTable& table, double s) {
    if (!(s > 0.0) || s > 1.0) throw InvalidS("s must lie in (0,1]");
    const int d = table.params.d;
    const double p_kernel = d + 2.0 * table.params.alpha;
    if (!(s * p_kernel > d))
        throw SubcriticalS("s (d + 2 alpha) <= d: step weights not summable");
    SawKernel k;
    k.d = d;
    k.truncation_radius = table.radius;
    k.decay_a = s * p_kernel - d;
    k.provenance = "|(-Delta)^alpha|^s, alpha=" + fmt17(table.params.alpha) +
                   ", s=" + fmt17(s);
    k.weights.assign(table.values.size(), 0.0);
    double upper_kernel = 0.0;  // sup |K(x)| |x|^{d+2a} over the far half
    const double lo = std::max(2.0, 0.5 * table.radius);
    for (const Offset& x : box_offsets(d, table.radius)) {
        if (is_zero(x)) continue;
        const double w = std::pow(std::abs(table.at(x)), s);
        k.weights[k.index_of(x)] = w;
        k.row_sum += w;
        const double r2 = norm2(x);
        if (r2 >= lo)
            upper_kernel =
                std::max(upper_kernel, std::abs(table.at(x)) * std::pow(r2, p_kernel));
    }
    if (table.params.alpha == 1.0) {
        k.row_sum_tail = 0.0;
    } else {
        k.row_sum_tail = std::pow(1.1 * upper_kernel, s) *
                         lattice_tail_sum_bound(d, table.radius, s * p_kernel);
    }
    double upper_d = std::pow(1.1 * upper_kernel, s);
    for (const Offset& x : box_offsets(d, table.radius)) {
        if (is_zero(x)) continue;
        const double w = k.weights[k.index_of(x)];
        if (w > 0.0) upper_d = std::max(upper_d, w * std::pow(norm2(x), d + k.decay_a));
    }
    k.upper_const = upper_d;
    return k;
}

SawKernel make_saw_kernel(int d, int radius,
                          const std::vector<std::pair<Offset, double>>& weights,
                          double decay_a, const std::string& provenance) {
    SawKernel k;
    k.d = d;
    k.truncation_radius = radius;
    k.decay_a = decay_a;
    k.provenance = provenance;
    long n = 1;
    for (int j = 0; j < d; ++j) n *= 2L * radius + 1;
    k.weights.assign(n, 0.0);
    for (const auto& [x, w] : weights) {
        if (w < 0.0) throw InvalidS("saw kernel weights must be nonnegative");
        if (is_zero(x)) {
            if (w != 0.0) throw InvalidS("saw kernel weight at the origin must be 0");
            continue;
        }
        k.weights[k.index_of(x)] = w;
        k.row_sum += w;
    }
    for (const auto& [x, w] : weights)
        if (!is_zero(x) && w > 0.0)
            k.upper_const = std::max(k.upper_const, w * std::pow(norm2(x), d + decay_a));
    return k;
}

const std::vector<double>& SawEnumeration::counts_at(const Offset& x) const {
    long idx = 0;
    const long side = 2L * window_radius + 1;
    for (int j = 0; j < d; ++j) {
        if (std::abs(x[j]) > window_radius)
            throw RadiusTooSmall("target outside enumeration window");
        idx = idx * side + (x[j] + window_radius);
    }
    return counts[idx];
}

std::vector<double> SawEnumeration::level_sums() const {
    std::vector<double> out(n_max + 1, 0.0);
    for (const auto& c : counts)
        for (int n = 0; n <= n_max; ++n) out[n] += c[n];
    return out;
}

namespace {

struct Step {
    int to;
    double w;
};

struct DfsContext {
    const std::vector<std::vector<Step>>& adj;
    int n_max;
    std::vector<std::vector<double>>& buf;  // [site][n]
    std::vector<char>& visited;
    long local_nodes = 0;
};

void dfs(DfsContext& ctx, int u, int len, double prod) {
    for (const Step& s : ctx.adj[u]) {
        if (ctx.visited[s.to]) continue;
        ++ctx.local_nodes;
        const double np = prod * s.w;
        ctx.buf[s.to][len + 1] += np;
        if (len + 1 < ctx.n_max) {
            ctx.visited[s.to] = 1;
            dfs(ctx, s.to, len + 1, np);
            ctx.visited[s.to] = 0;
        }
    }
}

}  // namespace

SawEnumeration enumerate_saws(const SawKernel& kernel, int n_max, int window_radius,
                              long node_budget, int exact_cap) {
    if (n_max < 0 || n_max > exact_cap)
        throw BudgetExceeded("n_max exceeds the exact enumeration cap");
    if (window_radius < 1) throw RadiusTooSmall("window radius must be >= 1");
    if (kernel.truncation_radius < 2 * window_radius)
        throw RadiusTooSmall("saw kernel must cover twice the window radius");

    SawEnumeration e;
    e.d = kernel.d;
    e.n_max = n_max;
    e.window_radius = window_radius;
    e.sites = box_offsets(kernel.d, window_radius);
    const int S = int(e.sites.size());
    e.counts.assign(S, std::vector<double>(n_max + 1, 0.0));

    int origin = -1;
    for (int i = 0; i < S; ++i)
        if (is_zero(e.sites[i])) origin = i;
    e.counts[origin][0] = 1.0;
    if (n_max == 0) return e;

    // adjacency sorted by descending weight, zero-weight steps dropped
    std::vector<std::vector<Step>> adj(S);
    Offset diff(kernel.d);
    for (int from = 0; from < S; ++from) {
        for (int to = 0; to < S; ++to) {
            if (to == from) continue;
            for (int j = 0; j < kernel.d; ++j)
                diff[j] = e.sites[to][j] - e.sites[from][j];
            const double w = kernel.at(diff);
            if (w > 0.0) adj[from].push_back({to, w});
        }
        std::sort(adj[from].begin(), adj[from].end(), [](const Step& a, const Step& b) {
            return a.w > b.w || (a.w == b.w && a.to < b.to);
        });
    }

    std::atomic<long> nodes{0};
    std::atomic<bool> over_budget{false};
    const std::vector<Step> first = adj[origin];
    std::vector<std::vector<std::vector<double>>> partial(first.size());

#pragma omp parallel for schedule(dynamic)
    for (long fi = 0; fi < long(first.size()); ++fi) {
        if (over_budget.load(std::memory_order_relaxed)) continue;
        const Step& s = first[fi];
        std::vector<std::vector<double>> buf(S, std::vector<double>(n_max + 1, 0.0));
        std::vector<char> visited(S, 0);
        visited[origin] = 1;
        buf[s.to][1] = s.w;
        DfsContext ctx{adj, n_max, buf, visited, 1};
        if (n_max > 1) {
            visited[s.to] = 1;
            dfs(ctx, s.to, 1, s.w);
        }
        if (nodes.fetch_add(ctx.local_nodes) + ctx.local_nodes > node_budget)
            over_budget.store(true, std::memory_order_relaxed);
        partial[fi] = std::move(buf);
    }
    if (over_budget.load())
        throw BudgetExceeded("saw enumeration exceeded the node budget");

    // fixed-order reduction for bitwise determinism
    for (size_t fi = 0; fi < partial.size(); ++fi)
        for (int i = 0; i < S; ++i)
            for (int n = 1; n <= n_max; ++n) e.counts[i][n] += partial[fi][i][n];
    e.nodes_visited = nodes.load();
    return e;
}

WalkCounts saw_counts(const SawKernel& kernel, const Offset& x, int n_max,
                      int window_radius, long node_budget) {
    if (norm_inf(x) > window_radius)
        throw RadiusTooSmall("target outside the requested window");
    SawEnumeration e = enumerate_saws(kernel, n_max, window_radius, node_budget);
    WalkCounts out;
    out.target = x;
    out.counts = e.counts_at(x);
    out.window_radius = window_radius;
    return out;
}

bool TwoPointValue::certified() const {
    return std::isfinite(tail_estimate) && std::isfinite(window_loss_bound);
}

namespace {

// escape weight T(u) = sum over v outside the window of D(u,v), plus the
// kernel's own beyond-radius tail
std::vector<double> escape_weights(const SawKernel& kernel, const SawEnumeration& e) {
    std::vector<double> T(e.sites.size(), 0.0);
    const std::vector<Offset> steps = box_offsets(kernel.d, kernel.truncation_radius);
    for (size_t ui = 0; ui < e.sites.size(); ++ui) {
        double t = kernel.row_sum_tail;
        for (const Offset& z : steps) {
            if (is_zero(z)) continue;
            bool outside = false;
            for (int j = 0; j < kernel.d; ++j)
                if (std::abs(e.sites[ui][j] + z[j]) > e.window_radius) outside = true;
            if (outside) t += kernel.at(z);
        }
        T[ui] = t;
    }
    return T;
}

double geometric_tail(double gamma, double rho_up, int n_max) {
    const double q = gamma * rho_up;
    if (q >= 1.0) return std::numeric_limits<double>::infinity();
    return std::pow(q, n_max + 1) / (1.0 - q);
}

// first-exit decomposition: C_full(x) - C_win(x) <= gamma chi_hat
// sum_u C_up(u) T(u), with C_up a pointwise upper bound on C_full inside
double window_loss(const SawKernel& kernel, const SawEnumeration& e, double gamma) {
    if (gamma == 0.0) return 0.0;
    const double q = gamma * kernel.rho_upper();
    if (q >= 1.0) return std::numeric_limits<double>::infinity();
    const double chi_hat = 1.0 / (1.0 - q);
    const std::vector<double> T = escape_weights(kernel, e);
    const double tg = geometric_tail(gamma, kernel.rho_upper(), e.n_max);
    double maxT = 0.0;
    for (double t : T) maxT = std::max(maxT, t);
    const double crude = gamma * chi_hat * chi_hat * maxT;
    double S = 0.0;
    for (size_t ui = 0; ui < e.sites.size(); ++ui) {
        double c_win = 0.0, g = 1.0;
        for (int n = 0; n <= e.n_max; ++n) {
            c_win += e.counts[ui][n] * g;
            g *= gamma;
        }
        // pointwise cap: c_n(u) <= rho^n gives C(u) <= gamma rho chi_hat off 0
        const double cap =
            is_zero(e.sites[ui]) ? 1.0 + q * chi_hat : q * chi_hat;
        S += std::min(c_win + tg + crude, cap) * T[ui];
    }
    return gamma * chi_hat * S;
}

}  // namespace

TwoPointValue two_point_from(const SawEnumeration& e, const SawKernel& kernel,
                             double gamma, const Offset& x) {
    if (!(gamma >= 0.0)) throw InvalidS("gamma must be nonnegative");
    TwoPointValue v;
    v.gamma = gamma;
    v.n_max = e.n_max;
    const std::vector<double>& c = e.counts_at(x);
    double g = 1.0;
    for (int n = 0; n <= e.n_max; ++n) {
        v.value += c[n] * g;
        g *= gamma;
    }
    if (is_zero(x)) return v;  // C_gamma(0) = 1 exactly, nothing truncated
    v.tail_estimate = geometric_tail(gamma, kernel.rho_upper(), e.n_max);
    v.window_loss_bound = window_loss(kernel, e, gamma);
    return v;
}

TwoPointValue two_point(const SawKernel& kernel, double gamma, const Offset& x,
                        int n_max, int window_radius, long node_budget) {
    SawEnumeration e = enumerate_saws(kernel, n_max, window_radius, node_budget);
    return two_point_from(e, kernel, gamma, x);
}

double radius_lower_bound(const SawKernel& kernel) {
    if (!(kernel.rho_upper() > 0.0)) throw InvalidS("saw kernel has empty row sum");
    return 1.0 / kernel.rho_upper();
}

TwoPointValue susceptibility_partial(const SawKernel& kernel, double gamma, int n_max,
                                     int window_radius, long node_budget) {
    SawEnumeration e = enumerate_saws(kernel, n_max, window_radius, node_budget);
    TwoPointValue v;
    v.gamma = gamma;
    v.n_max = n_max;
    const std::vector<double> sums = e.level_sums();
    double g = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        v.value += sums[n] * g;
        g *= gamma;
    }
    v.tail_estimate = geometric_tail(gamma, kernel.rho_upper(), n_max);
    v.window_loss_bound = window_loss(kernel, e, gamma);
    return v;
}

namespace {

// c(r) = sum_{|u| <= r/3} C_up(u) gamma sum_{|u+z| >= r/3} D(u, u+z)
double exit_weight_c(const SawKernel& kernel, const SawEnumeration& e, double gamma,
                     double r, double c_up_pad) {
    const double ell = r / 3.0;
    const std::vector<Offset> steps = box_offsets(kernel.d, kernel.truncation_radius);
    double total = 0.0;
    for (size_t ui = 0; ui < e.sites.size(); ++ui) {
        if (norm2(e.sites[ui]) > ell) continue;
        double c_up = c_up_pad, g = 1.0;
        for (int n = 0; n <= e.n_max; ++n) {
            c_up += e.counts[ui][n] * g;
            g *= gamma;
        }
        double row = kernel.row_sum_tail;
        for (const Offset& z : steps) {
            if (is_zero(z)) continue;
            double n2 = 0.0;
            for (int j = 0; j < kernel.d; ++j) {
                const double v = e.sites[ui][j] + z[j];
                n2 += v * v;
            }
            if (n2 >= ell * ell) row += kernel.at(z);
        }
        total += c_up * gamma * row;
    }
    return total;
}

const int kEllGrid[] = {1, 2, 3, 4, 6, 8, 12, 16, 24, 32};

}  // namespace

int ell_tilde_estimate(const SawKernel& kernel, double gamma, double a, double C,
                       int search_cap, int n_max, int window_radius, long node_budget) {
    (void)C;  // the kernel constant enters through K0, not the search itself
    if (gamma * kernel.rho_upper() >= 1.0)
        throw GammaSupercritical("ell-tilde needs certified subcritical gamma");
    if (window_radius <= 0) window_radius = std::max(12, search_cap / 3 + 2);
    SawEnumeration e = enumerate_saws(kernel, n_max, window_radius, node_budget);
    const double threshold = 0.5 * std::pow(2.0, -(kernel.d + a));
    std::vector<int> grid;
    for (int r : kEllGrid)
        if (r <= search_cap) grid.push_back(r);
    if (grid.empty()) throw EmptyGrid("ell-tilde search grid is empty");
    const double pad = geometric_tail(gamma, kernel.rho_upper(), n_max);
    int best = -1;
    for (int i = int(grid.size()) - 1; i >= 0; --i) {
        if (exit_weight_c(kernel, e, gamma, grid[i], pad) <= threshold)
            best = grid[i];
        else
            break;
    }
    if (best < 0) throw SearchExhausted("no sampled radius satisfies the c(x) bound");
    return best;
}

double k0_constant(double ell_tilde, double chi, double gamma, double C, int d,
                   double a) {
    if (!(ell_tilde >= 1.0) || !(chi >= 1.0))
        throw InvalidS("k0 needs ell >= 1 and chi >= 1");
    return std::pow(ell_tilde, d + a) * chi + 2.0 * chi * chi * gamma * C;
}

DecayBoundReport decay_bound_check(const SawKernel& kernel, double gamma, double a,
                                   int r_min, int r_max, int n_max, int window_radius,
                                   long node_budget, double tolerance) {
    if (window_radius <= 0) window_radius = r_max + 8;
    SawEnumeration e = enumerate_saws(kernel, n_max, window_radius, node_budget);

    DecayBoundReport rep;
    const double tg = geometric_tail(gamma, kernel.rho_upper(), n_max);
    const double loss = window_loss(kernel, e, gamma);
    const std::vector<double> sums = e.level_sums();
    double chi = 0.0, g = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        chi += sums[n] * g;
        g *= gamma;
    }
    rep.chi_upper = chi + tg;
    rep.window_loss = loss;
    const double pad = tg;
    const double threshold = 0.5 * std::pow(2.0, -(kernel.d + a));
    rep.ell_tilde = -1;
    for (int i = sizeof(kEllGrid) / sizeof(int) - 1; i >= 0; --i) {
        if (exit_weight_c(kernel, e, gamma, kEllGrid[i], pad) <= threshold)
            rep.ell_tilde = kEllGrid[i];
        else
            break;
    }
    if (rep.ell_tilde < 0)
        throw SearchExhausted("no sampled radius satisfies the c(x) bound");
    rep.k0 = k0_constant(rep.ell_tilde, rep.chi_upper, gamma, kernel.upper_const,
                         kernel.d, a);

    for (int r = r_min; r <= r_max; ++r) {
        Offset x(kernel.d, 0);
        x[0] = r;
        TwoPointValue v = two_point_from(e, kernel, gamma, x);
        const double ratio =
            (v.value + v.tail_estimate) * std::pow(double(r), kernel.d + a) / rep.k0;
        rep.per_radius.emplace_back(double(r), ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.pass = rep.max_ratio <= 1.0 + tolerance;
    return rep;
}

void write_counts_csv(const SawEnumeration& e, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path);
    f << "# d=" << e.d << " n_max=" << e.n_max << " window=" << e.window_radius << "\n";
    for (size_t i = 0; i < e.sites.size(); ++i)
        for (int n = 0; n <= e.n_max; ++n) {
            f << n << ",";
            for (int c : e.sites[i]) f << c << ",";
            f << fmt17(e.counts[i][n]) << "\n";
        }
}

void write_two_point_csv(const SawKernel& kernel, const SawEnumeration& e, double gamma,
                         const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path);
    f << "# d=" << e.d << " gamma=" << fmt17(gamma) << " n_max=" << e.n_max
      << " window=" << e.window_radius << "\n";
    const double tail = geometric_tail(gamma, kernel.rho_upper(), e.n_max);
    for (size_t i = 0; i < e.sites.size(); ++i) {
        double value = 0.0, g = 1.0;
        for (int n = 0; n <= e.n_max; ++n) {
            value += e.counts[i][n] * g;
            g *= gamma;
        }
        for (int c : e.sites[i]) f << c << ",";
        f << fmt17(value) << "," << fmt17(tail) << "\n";
    }
}

}  // namespace fraclat
