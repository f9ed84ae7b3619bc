#include "fraclat/anderson.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "fraclat/errors.hpp"
#include "fraclat/fit.hpp"
#include "fraclat/io.hpp"
#include "fraclat/quadrature.hpp"
#include "fraclat/rng.hpp"

namespace fraclat {

DisorderSpec DisorderSpec::uniform(double half_width) {
    if (!(half_width > 0.0)) throw Error("uniform disorder needs positive width");
    DisorderSpec d;
    d.family = DisorderFamily::uniform_symmetric;
    d.half_width = half_width;
    d.tau = 1.0;
    d.m_tau = 1.0 / half_width;
    d.density_bound = 0.5 / half_width;
    return d;
}

DisorderSpec DisorderSpec::custom(const std::vector<double>& x,
                                  const std::vector<double>& p) {
    if (x.size() < 2 || x.size() != p.size())
        throw Error("custom density needs matching tables of length >= 2");
    DisorderSpec d;
    d.family = DisorderFamily::custom_density;
    d.density_x = x;
    d.density_p = p;
    double mass = 0.0, pmax = 0.0;
    for (size_t i = 0; i + 1 < x.size(); ++i) {
        if (x[i + 1] <= x[i]) throw Error("density grid must increase");
        if (p[i] < 0.0 || p[i + 1] < 0.0) throw Error("density must be nonnegative");
        mass += 0.5 * (p[i] + p[i + 1]) * (x[i + 1] - x[i]);
    }
    if (!(mass > 0.0)) throw Error("density has no mass");
    for (double& v : d.density_p) v /= mass;
    for (double v : d.density_p) pmax = std::max(pmax, v);
    d.tau = 1.0;
    d.density_bound = pmax;
    d.m_tau = 2.0 * pmax;  // P[v-delta, v+delta] <= 2 delta sup p
    return d;
}

void DisorderSpec::validate() const {
    if (!(tau > 0.0) || tau > 1.0) throw InvalidS("tau must lie in (0,1]");
    if (!(m_tau > 0.0)) throw Error("m_tau must be positive");
    if (family == DisorderFamily::uniform_symmetric && !(half_width > 0.0))
        throw Error("uniform disorder needs positive width");
}

double DisorderSpec::sample(uint64_t master_seed, uint64_t sample_index,
                            uint64_t site_index) const {
    const double u = uniform01(substream(master_seed, sample_index, site_index));
    if (family == DisorderFamily::uniform_symmetric)
        return (2.0 * u - 1.0) * half_width;
    // inverse CDF on the piecewise-linear tabulated density
    double acc = 0.0;
    for (size_t i = 0; i + 1 < density_x.size(); ++i) {
        const double seg =
            0.5 * (density_p[i] + density_p[i + 1]) * (density_x[i + 1] - density_x[i]);
        if (acc + seg >= u || i + 2 == density_x.size()) {
            const double frac = seg > 0.0 ? std::clamp((u - acc) / seg, 0.0, 1.0) : 0.0;
            return density_x[i] + frac * (density_x[i + 1] - density_x[i]);
        }
        acc += seg;
    }
    return density_x.back();
}

void ModelParams::validate() const {
    lap.validate();
    disorder.validate();
    const double s_lo = lap.d / (lap.d + 2.0 * lap.alpha);
    if (!(s > s_lo) || !(s < disorder.tau))
        throw InvalidS("s must lie in (d/(d+2 alpha), tau)");
    if (!(lambda > 0.0)) throw Error("lambda must be positive");
    if (z.imag() == 0.0) throw Error("z must have nonzero imaginary part");
}

BoxGeometry BoxGeometry::cube(int d, int L) {
    if (L < 1) throw RadiusTooSmall("box side must be >= 1");
    BoxGeometry b;
    b.d = d;
    b.L = L;
    b.sites = box_offsets(d, L);
    return b;
}

long BoxGeometry::index_of(const Offset& x) const {
    long idx = 0;
    const long side = 2L * L + 1;
    for (int j = 0; j < d; ++j) {
        if (std::abs(x[j]) > L) throw RadiusTooSmall("site outside the box");
        idx = idx * side + (x[j] + L);
    }
    return idx;
}

DerivedParams derived_params(double s, double tau, double m_tau, double lambda, int d,
                             double alpha) {
    if (!(s > 0.0) || !(s < tau) || tau > 1.0) throw InvalidS("need 0 < s < tau <= 1");
    if (!(s * (d + 2.0 * alpha) > d)) throw InvalidS("need s (d + 2 alpha) > d");
    if (!(lambda > 0.0)) throw InvalidS("lambda must be positive");
    DerivedParams p;
    p.theta_s = tau / (tau - s) * std::pow(m_tau, s / tau);
    p.alpha_s = 0.5 * (s * (d + 2.0 * alpha) - d);
    p.gamma = p.theta_s / std::pow(lambda, s);
    return p;
}

namespace {

// sum_{x in Z^d} |K(x)|^s, x = 0 included, off-diagonal truncation tail kept
double fractional_kernel_sum(const KernelTable& kernel, double s) {
    SawKernel d = saw_kernel_from_laplacian(kernel, s);
    const double k0 = std::pow(std::abs(kernel.at(Offset(kernel.params.d, 0))), s);
    return k0 + d.row_sum + d.row_sum_tail;
}

}  // namespace

double threshold_am(double s, const DisorderSpec& disorder, const KernelTable& kernel) {
    disorder.validate();
    if (!(s > 0.0) || !(s < disorder.tau)) throw InvalidS("need 0 < s < tau");
    const double sum = fractional_kernel_sum(kernel, s);
    return std::pow(disorder.m_tau, 1.0 / disorder.tau) *
           std::pow(2.0 * disorder.tau / (disorder.tau - s) * sum, 1.0 / s);
}

double threshold_ag(double s, double beta, const DisorderSpec& disorder,
                    const KernelTable& kernel) {
    disorder.validate();
    if (std::abs(disorder.tau - 1.0) > 1e-12)
        throw Error("the weighted threshold uses the bounded-density route (tau = 1)");
    if (!(s > 0.0) || !(s < 1.0)) throw InvalidS("need 0 < s < 1");
    const int d = kernel.params.d;
    const double alpha_s2 = s * (d + 2.0 * kernel.params.alpha) - d;  // 2 alpha_s
    if (beta < 0.0 || beta >= alpha_s2)
        throw BetaTooLarge("need 0 <= beta < 2 alpha_s for a convergent sum");

    const double p = kernel.params.d + 2.0 * kernel.params.alpha;
    double sum = std::pow(std::abs(kernel.at(Offset(d, 0))), s);
    double upper = 0.0;
    const double lo = std::max(2.0, 0.5 * kernel.radius);
    for (const Offset& x : box_offsets(d, kernel.radius)) {
        if (is_zero(x)) continue;
        const double r2 = norm2(x);
        sum += std::pow(std::abs(kernel.at(x)), s) * std::pow(1.0 + r2, beta);
        if (r2 >= lo) upper = std::max(upper, std::abs(kernel.at(x)) * std::pow(r2, p));
    }
    if (kernel.params.alpha < 1.0) {
        // (1 + |x|)^beta <= ((1 + 1/R)|x|)^beta beyond the radius
        sum += std::pow(1.1 * upper, s) * std::pow(1.0 + 1.0 / kernel.radius, beta) *
               lattice_tail_sum_bound(d, kernel.radius, s * p - beta);
    }
    return disorder.m_tau * std::pow(2.0 / (1.0 - s) * sum, 1.0 / s);
}

double threshold_saw(double s, const DisorderSpec& disorder,
                          const SawKernel& saw_kernel) {
    disorder.validate();
    if (!(s > 0.0) || !(s < disorder.tau)) throw InvalidS("need 0 < s < tau");
    const double r_chi = radius_lower_bound(saw_kernel);
    const double theta =
        disorder.tau / (disorder.tau - s) * std::pow(disorder.m_tau, s / disorder.tau);
    return std::pow(theta / r_chi, 1.0 / s);
}

ThresholdReport threshold_chain(double s, double beta, const DisorderSpec& disorder,
                                const KernelTable& kernel, const SawKernel& saw_kernel) {
    ThresholdReport rep;
    rep.s = s;
    rep.beta = beta;
    rep.lambda0 = threshold_saw(s, disorder, saw_kernel);
    rep.lambda_am = threshold_am(s, disorder, kernel);
    rep.lambda_ag = threshold_ag(s, beta, disorder, kernel);
    DerivedParams dp = derived_params(s, disorder.tau, disorder.m_tau, 3.0 * rep.lambda0,
                                      kernel.params.d, kernel.params.alpha);
    rep.theta_s = dp.theta_s;
    rep.alpha_s = dp.alpha_s;
    rep.gamma_at_3lambda0 = dp.gamma;
    rep.radius_bound_used = radius_lower_bound(saw_kernel);
    return rep;
}

void write_threshold_json(const ThresholdReport& rep, const std::string& path) {
    nlohmann::json j;
    j["s"] = rep.s;
    j["beta"] = rep.beta;
    j["lambda0"] = rep.lambda0;
    j["lambda_am"] = rep.lambda_am;
    j["lambda_ag"] = rep.lambda_ag;
    j["theta_s"] = rep.theta_s;
    j["alpha_s"] = rep.alpha_s;
    j["gamma_at_3lambda0"] = rep.gamma_at_3lambda0;
    j["radius_bound_used"] = rep.radius_bound_used;
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path);
    f << j.dump(2) << "\n";
}

double g_function(double s, double lambda, double c_upper, double alpha) {
    if (!(s > 0.0) || !(s < 1.0)) throw InvalidS("g needs 0 < s < 1");
    const double q = (1.0 + 2.0 * alpha) * s - 1.0;
    if (!(q > 0.0)) throw InvalidS("g needs s above the summability boundary");
    return std::pow(c_upper / lambda, s) / (1.0 - s) * (1.0 + 2.0 / q);
}

OptimizeResult optimize_s(const DisorderSpec& disorder, const KernelTable& kernel,
                          const std::vector<double>& s_grid, double c_upper_for_g) {
    if (s_grid.empty()) throw EmptyGrid("optimize_s needs a nonempty grid");
    OptimizeResult out;
    out.lambda0_star = std::numeric_limits<double>::infinity();
    for (double s : s_grid) {
        SawKernel d = saw_kernel_from_laplacian(kernel, s);
        const double l0 = threshold_saw(s, disorder, d);
        out.grid.emplace_back(s, l0);
        if (l0 < out.lambda0_star) {
            out.lambda0_star = l0;
            out.s_star = s;
        }
        if (kernel.params.d == 1 && c_upper_for_g > 0.0) {
            // smallest lambda with g(s, lambda) < 1
            const double q = (1.0 + 2.0 * kernel.params.alpha) * s - 1.0;
            const double lg =
                c_upper_for_g * std::pow((1.0 + 2.0 / q) / (1.0 - s), 1.0 / s);
            out.g_thresholds.emplace_back(s, lg);
        }
    }
    return out;
}

std::vector<double> sample_disorder(const DisorderSpec& disorder, const BoxGeometry& box,
                                    uint64_t master_seed, uint64_t sample_index) {
    disorder.validate();
    std::vector<double> omega(box.size());
    for (long i = 0; i < box.size(); ++i)
        omega[i] = disorder.sample(master_seed, sample_index, uint64_t(i));
    return omega;
}

Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const BoxGeometry& box,
                                  const KernelTable& kernel,
                                  const std::vector<double>& omega) {
    params.validate();
    if (kernel.radius < 2 * box.L)
        throw RadiusTooSmall("kernel table must cover the box diameter");
    if (long(omega.size()) != box.size()) throw Error("omega size mismatch");
    const long n = box.size();
    Eigen::MatrixXd H(n, n);
    Offset diff(box.d);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            for (int c = 0; c < box.d; ++c) diff[c] = box.sites[i][c] - box.sites[j][c];
            H(i, j) = kernel.at(diff);
        }
        H(i, i) += params.lambda * omega[i];
    }
    return H;
}

GreensSolver::GreensSolver(const Eigen::MatrixXd& H, std::complex<double> z) {
    if (z.imag() == 0.0) throw Error("greens solver needs Im z != 0");
    shifted_ = H.cast<std::complex<double>>();
    shifted_.diagonal().array() -= z;
    scale_ = H.cwiseAbs().maxCoeff() + std::abs(z);
    lu_.compute(shifted_);
    columns_.resize(H.rows());
    have_.assign(H.rows(), 0);
}

const Eigen::VectorXcd& GreensSolver::column(long yi) {
    if (!have_[yi]) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(shifted_.rows());
        e[yi] = 1.0;
        Eigen::VectorXcd u = lu_.solve(e);
        Eigen::VectorXcd r = shifted_ * u - e;
        double rel = r.norm() / std::max(1.0, scale_ * u.norm());
        if (rel > 1e-10) {
            u -= lu_.solve(r);  // one refinement pass
            r = shifted_ * u - e;
            rel = r.norm() / std::max(1.0, scale_ * u.norm());
            if (rel > 1e-10) throw SolveFailed("greens solve residual above 1e-10");
        }
        columns_[yi] = std::move(u);
        have_[yi] = 1;
    }
    return columns_[yi];
}

std::complex<double> GreensSolver::entry(long xi, long yi) { return column(yi)[xi]; }

std::complex<double> greens_entry(const Eigen::MatrixXd& H, std::complex<double> z,
                                  long xi, long yi) {
    GreensSolver solver(H, z);
    return solver.entry(xi, yi);
}

std::vector<McEstimate> fractional_moment_mc(
    const ModelParams& params, const BoxGeometry& box, const KernelTable& kernel,
    const std::vector<std::pair<Offset, Offset>>& pairs, long n_samples,
    uint64_t master_seed) {
    params.validate();
    if (n_samples < 100) throw Error("fractional_moment_mc needs n_samples >= 100");
    if (pairs.empty()) throw Error("no pairs requested");
    if (kernel.radius < 2 * box.L)
        throw RadiusTooSmall("kernel table must cover the box diameter");

    const long n = box.size();
    Eigen::MatrixXd K(n, n);  // disorder-free part, shared by all samples
    {
        Offset diff(box.d);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                for (int c = 0; c < box.d; ++c)
                    diff[c] = box.sites[i][c] - box.sites[j][c];
                K(i, j) = kernel.at(diff);
            }
    }
    const double scale = K.cwiseAbs().maxCoeff() + params.lambda + std::abs(params.z);

    std::vector<long> col_of_pair(pairs.size()), row_of_pair(pairs.size());
    std::vector<long> columns;  // distinct source sites
    for (size_t p = 0; p < pairs.size(); ++p) {
        const long ci = box.index_of(pairs[p].first);
        row_of_pair[p] = box.index_of(pairs[p].second);
        auto it = std::find(columns.begin(), columns.end(), ci);
        if (it == columns.end()) {
            columns.push_back(ci);
            col_of_pair[p] = long(columns.size()) - 1;
        } else {
            col_of_pair[p] = it - columns.begin();
        }
    }

    // per-sample values land in pre-assigned slots; the reduction afterwards
    // runs in sample order, independent of the thread count
    std::vector<double> values(size_t(n_samples) * pairs.size(), 0.0);
    std::vector<char> discarded(n_samples, 0);

#pragma omp parallel
    {
        Eigen::MatrixXcd shifted(n, n);
#pragma omp for schedule(dynamic, 4)
        for (long sample = 0; sample < n_samples; ++sample) {
            shifted = K.cast<std::complex<double>>();
            for (long i = 0; i < n; ++i)
                shifted(i, i) +=
                    params.lambda *
                        params.disorder.sample(master_seed, uint64_t(sample), uint64_t(i)) -
                    params.z;
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
            bool bad = false;
            std::vector<Eigen::VectorXcd> cols(columns.size());
            for (size_t c = 0; c < columns.size() && !bad; ++c) {
                Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
                e[columns[c]] = 1.0;
                cols[c] = lu.solve(e);
                Eigen::VectorXcd r = shifted * cols[c] - e;
                double rel = r.norm() / std::max(1.0, scale * cols[c].norm());
                if (rel > 1e-10) {
                    cols[c] -= lu.solve(r);
                    r = shifted * cols[c] - e;
                    rel = r.norm() / std::max(1.0, scale * cols[c].norm());
                    if (rel > 1e-10) bad = true;
                }
            }
            if (bad) {
                discarded[sample] = 1;
                continue;
            }
            for (size_t p = 0; p < pairs.size(); ++p)
                values[size_t(sample) * pairs.size() + p] =
                    std::pow(std::abs(cols[col_of_pair[p]][row_of_pair[p]]), params.s);
        }
    }

    long kept = 0, dropped = 0;
    for (long sample = 0; sample < n_samples; ++sample)
        (discarded[sample] ? dropped : kept) += 1;
    if (kept == 0) throw SolveFailed("every sample was discarded");

    std::vector<McEstimate> out(pairs.size());
    for (size_t p = 0; p < pairs.size(); ++p) {
        McEstimate& m = out[p];
        m.x0 = pairs[p].first;
        m.x = pairs[p].second;
        m.n_samples = kept;
        m.master_seed = master_seed;
        m.discarded = dropped;
        double sum = 0.0;
        for (long sample = 0; sample < n_samples; ++sample)
            if (!discarded[sample]) sum += values[size_t(sample) * pairs.size() + p];
        m.mean = sum / kept;
        double ss = 0.0;
        for (long sample = 0; sample < n_samples; ++sample)
            if (!discarded[sample]) {
                const double dlt = values[size_t(sample) * pairs.size() + p] - m.mean;
                ss += dlt * dlt;
            }
        m.std_error = kept > 1 ? std::sqrt(ss / (double(kept) * (kept - 1))) : 0.0;

        // median of 16 block means alongside the plain mean (heavy tails)
        const int blocks = 16;
        std::vector<double> bm;
        const long per = n_samples / blocks;
        for (int b = 0; b < blocks && per > 0; ++b) {
            double bs = 0.0;
            long bn = 0;
            for (long sample = b * per; sample < (b + 1) * per; ++sample)
                if (!discarded[sample]) {
                    bs += values[size_t(sample) * pairs.size() + p];
                    ++bn;
                }
            if (bn > 0) bm.push_back(bs / bn);
        }
        if (!bm.empty()) {
            std::sort(bm.begin(), bm.end());
            m.median_of_means = bm[bm.size() / 2];
        }
    }
    return out;
}

void write_mc_csv(const std::vector<McEstimate>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path);
    for (const McEstimate& m : rows) {
        for (int c : m.x0) f << c << ",";
        for (int c : m.x) f << c << ",";
        f << fmt17(m.mean) << "," << fmt17(m.std_error) << "," << m.n_samples << ","
          << m.master_seed << "\n";
    }
}

std::vector<McEstimate> read_mc_csv(int d, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path);
    std::vector<McEstimate> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (long(cells.size()) != 2 * d + 4) throw Error("malformed mc csv row");
        McEstimate m;
        m.x0.resize(d);
        m.x.resize(d);
        for (int c = 0; c < d; ++c) m.x0[c] = std::stoi(cells[c]);
        for (int c = 0; c < d; ++c) m.x[c] = std::stoi(cells[d + c]);
        m.mean = std::stod(cells[2 * d]);
        m.std_error = std::stod(cells[2 * d + 1]);
        m.n_samples = std::stol(cells[2 * d + 2]);
        m.master_seed = std::stoull(cells[2 * d + 3]);
        out.push_back(m);
    }
    return out;
}

double decoupling_integral(const DisorderSpec& disorder, double s,
                           std::complex<double> eta) {
    disorder.validate();
    if (!(s > 0.0) || !(s < 1.0)) throw InvalidS("decoupling integral needs s in (0,1)");
    double lo, hi;
    auto density = [&](double v) -> double {
        if (disorder.family == DisorderFamily::uniform_symmetric)
            return 0.5 / disorder.half_width;
        const auto& xs = disorder.density_x;
        const auto& ps = disorder.density_p;
        auto it = std::upper_bound(xs.begin(), xs.end(), v);
        if (it == xs.begin() || it == xs.end()) return 0.0;
        const size_t i = it - xs.begin() - 1;
        const double t = (v - xs[i]) / (xs[i + 1] - xs[i]);
        return ps[i] + t * (ps[i + 1] - ps[i]);
    };
    if (disorder.family == DisorderFamily::uniform_symmetric) {
        lo = -disorder.half_width;
        hi = disorder.half_width;
    } else {
        lo = disorder.density_x.front();
        hi = disorder.density_x.back();
    }
    auto f = [&](double v) {
        return std::pow(std::abs(std::complex<double>(v, 0.0) - eta), -s) * density(v);
    };
    const double a = eta.real();
    if (eta.imag() != 0.0 || a < lo - 1e-12 || a > hi + 1e-12) {
        QuadResult r = adaptive_gk15(f, lo, hi, 1e-11, 1e-14, 400000);
        if (!r.converged) throw QuadratureDivergence("decoupling integral failed");
        return r.value;
    }
    // real eta on the support: integrable |v - a|^{-s} singularity, one- or
    // two-sided head depending on where eta sits
    const double delta = 1e-9;
    const double aa = std::clamp(a, lo, hi);
    double total = 0.0;
    int sides = 0;
    if (aa - delta > lo) {
        QuadResult left = adaptive_gk15(f, lo, aa - delta, 1e-11, 1e-14, 400000);
        if (!left.converged) throw QuadratureDivergence("decoupling integral failed");
        total += left.value;
        ++sides;
    }
    if (aa + delta < hi) {
        QuadResult right = adaptive_gk15(f, aa + delta, hi, 1e-11, 1e-14, 400000);
        if (!right.converged) throw QuadratureDivergence("decoupling integral failed");
        total += right.value;
        ++sides;
    }
    return total + density(aa) * sides * std::pow(delta, 1.0 - s) / (1.0 - s);
}

AprioriReport apriori_check(const ModelParams& base, const BoxGeometry& box,
                            const KernelTable& kernel, const std::vector<double>& lambdas,
                            const std::vector<double>& s_values,
                            const std::vector<std::complex<double>>& zs, long n_samples,
                            uint64_t master_seed) {
    AprioriReport rep;
    rep.all_pass = true;
    const long origin = box.index_of(Offset(box.d, 0));
    for (double lambda : lambdas) {
        for (const std::complex<double>& z : zs) {
            ModelParams p = base;
            p.lambda = lambda;
            p.z = z;
            // one sweep of |G(0,0)| per (lambda, z); every s reuses it
            std::vector<double> g00(n_samples);
#pragma omp parallel for schedule(dynamic, 8)
            for (long sample = 0; sample < n_samples; ++sample) {
                std::vector<double> omega =
                    sample_disorder(p.disorder, box, master_seed, uint64_t(sample));
                Eigen::MatrixXd H = build_hamiltonian(p, box, kernel, omega);
                GreensSolver solver(H, z);
                g00[sample] = std::abs(solver.entry(origin, origin));
            }
            for (double s : s_values) {
                // the a-priori bound needs only 0 < s < tau, not summability
                if (!(s > 0.0) || !(s < p.disorder.tau))
                    throw InvalidS("a-priori grid needs 0 < s < tau");
                const double theta = p.disorder.tau / (p.disorder.tau - s) *
                                     std::pow(p.disorder.m_tau, s / p.disorder.tau);
                AprioriRow row;
                row.lambda = lambda;
                row.s = s;
                row.z = z;
                row.bound = theta / std::pow(lambda, s);
                double sum = 0.0;
                for (long i = 0; i < n_samples; ++i) sum += std::pow(g00[i], s);
                row.mean = sum / n_samples;
                double ss = 0.0;
                for (long i = 0; i < n_samples; ++i) {
                    const double d2 = std::pow(g00[i], s) - row.mean;
                    ss += d2 * d2;
                }
                row.std_error = std::sqrt(ss / (double(n_samples) * (n_samples - 1)));
                row.pass = row.mean <= row.bound + 3.0 * row.std_error;
                rep.all_pass = rep.all_pass && row.pass;
                rep.rows.push_back(row);
            }
        }
    }
    // deterministic oracle over an eta grid, s from the base parameters
    rep.quadrature_bound = base.disorder.tau / (base.disorder.tau - base.s) *
                           std::pow(base.disorder.m_tau, base.s / base.disorder.tau);
    for (double eta = -1.5; eta <= 1.5 + 1e-12; eta += 0.125) {
        rep.quadrature_max = std::max(
            rep.quadrature_max, decoupling_integral(base.disorder, base.s, {eta, 0.0}));
        rep.quadrature_max = std::max(
            rep.quadrature_max, decoupling_integral(base.disorder, base.s, {eta, 0.3}));
    }
    rep.all_pass =
        rep.all_pass && rep.quadrature_max <= rep.quadrature_bound * (1.0 + 1e-9);
    return rep;
}

SawBoundReport saw_bound_check(const ModelParams& params,
                               const std::vector<McEstimate>& mc,
                               const std::vector<TwoPointValue>& two_points, double gamma,
                               double k0) {
    if (mc.size() != two_points.size()) throw Error("mc/two-point size mismatch");
    params.validate();
    DerivedParams dp =
        derived_params(params.s, params.disorder.tau, params.disorder.m_tau,
                       params.lambda, params.lap.d, params.lap.alpha);
    SawBoundReport rep;
    rep.gamma = gamma;
    rep.k0 = k0;
    rep.all_pass = true;
    for (size_t i = 0; i < mc.size(); ++i) {
        SawBoundRow row;
        Offset diff(params.lap.d);
        for (int c = 0; c < params.lap.d; ++c) diff[c] = mc[i].x[c] - mc[i].x0[c];
        row.offset = diff;
        row.mc_mean = mc[i].mean;
        row.mc_stderr = mc[i].std_error;
        row.saw_rhs = gamma * (two_points[i].value + two_points[i].tail_estimate);
        const double dist = norm2(diff);
        row.power_rhs = k0 * dp.theta_s / std::pow(params.lambda, params.s) /
                        std::pow(dist, params.lap.d + 2.0 * dp.alpha_s);
        row.pass_saw = row.mc_mean - 3.0 * row.mc_stderr <= row.saw_rhs;
        row.pass_power = row.mc_mean - 3.0 * row.mc_stderr <= row.power_rhs;
        rep.all_pass = rep.all_pass && row.pass_saw && row.pass_power;
        rep.rows.push_back(row);
    }
    return rep;
}

void write_bound_json(const SawBoundReport& rep, const std::string& path) {
    nlohmann::json j;
    j["gamma"] = rep.gamma;
    j["k0"] = rep.k0;
    j["all_pass"] = rep.all_pass;
    j["rows"] = nlohmann::json::array();
    for (const SawBoundRow& r : rep.rows) {
        nlohmann::json row;
        row["offset"] = r.offset;
        row["mc_mean"] = r.mc_mean;
        row["mc_stderr"] = r.mc_stderr;
        row["saw_rhs"] = r.saw_rhs;
        row["power_rhs"] = r.power_rhs;
        row["pass_saw"] = r.pass_saw;
        row["pass_power"] = r.pass_power;
        j["rows"].push_back(row);
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path);
    f << j.dump(2) << "\n";
}

EigenDecayReport eigen_decay_analysis(const ModelParams& params, const BoxGeometry& box,
                                      const KernelTable& kernel,
                                      const std::vector<double>& omega, double slack) {
    Eigen::MatrixXd H = build_hamiltonian(params, box, kernel, omega);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw EigFailed("eigendecomposition failed");
    const long n = box.size();
    DerivedParams dp =
        derived_params(params.s, params.disorder.tau, params.disorder.m_tau,
                       params.lambda, box.d, params.lap.alpha);
    EigenDecayReport rep;
    rep.threshold_t = 2.0 * dp.alpha_s - slack;
    std::vector<double> ts;
    Offset diff(box.d);
    for (long k = 0; k < n; ++k) {
        const Eigen::VectorXd phi = es.eigenvectors().col(k);
        long center = 0;
        double best = -1.0;
        for (long i = 0; i < n; ++i) {  // lexicographic sites: ties keep the smallest
            const double a = std::abs(phi[i]);
            if (a > best) {
                best = a;
                center = i;
            }
        }
        std::vector<double> lx, ly;
        for (long i = 0; i < n; ++i) {
            if (i == center) continue;
            const double a2 = phi[i] * phi[i];
            if (a2 < 1e-280) continue;
            for (int c = 0; c < box.d; ++c)
                diff[c] = box.sites[i][c] - box.sites[center][c];
            lx.push_back(std::log(1.0 + norm2(diff)));
            ly.push_back(std::log(a2));
        }
        EigenVectorDecay v;
        v.center = box.sites[center];
        if (lx.size() >= 8) {
            LinearFit fit = linear_fit(lx, ly);
            v.fitted_t = -fit.slope;
        } else {
            v.fitted_t = std::numeric_limits<double>::infinity();  // ultra-localized
        }
        v.passes = v.fitted_t >= rep.threshold_t;
        ts.push_back(v.fitted_t);
        rep.vectors.push_back(v);
    }
    std::vector<double> sorted = ts;
    std::sort(sorted.begin(), sorted.end());
    rep.median_t = sorted[sorted.size() / 2];
    long passing = 0;
    for (const auto& v : rep.vectors) passing += v.passes ? 1 : 0;
    rep.fraction_passing = double(passing) / double(n);
    return rep;
}

DynamicalMomentResult dynamical_moment(const ModelParams& params, const BoxGeometry& box,
                                       const KernelTable& kernel,
                                       const std::vector<double>& omega, double beta,
                                       const std::vector<double>& t_grid) {
    if (!(beta < 2.0 * params.lap.alpha))
        throw Error("dynamical moment needs beta < 2 alpha");
    Eigen::MatrixXd H = build_hamiltonian(params, box, kernel, omega);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw EigFailed("eigendecomposition failed");
    const long n = box.size();
    const long origin = box.index_of(Offset(box.d, 0));
    const Eigen::VectorXd v0 = es.eigenvectors().row(origin).transpose();

    DynamicalMomentResult out;
    std::vector<double> wx(n), boundary(n, 0.0);
    for (long i = 0; i < n; ++i) {
        wx[i] = std::pow(norm2(box.sites[i]), beta);
        boundary[i] = norm_inf(box.sites[i]) > 0.9 * box.L ? 1.0 : 0.0;
    }
    Eigen::VectorXcd phase(n), amp(n);
    for (double t : t_grid) {
        for (long k = 0; k < n; ++k) {
            const double th = -t * es.eigenvalues()[k];
            phase[k] = v0[k] * std::complex<double>(std::cos(th), std::sin(th));
        }
        amp = es.eigenvectors().cast<std::complex<double>>() * phase;
        double moment = 0.0, bmass = 0.0;
        for (long i = 0; i < n; ++i) {
            const double a2 = std::norm(amp[i]);
            if (i != origin) moment += wx[i] * a2;
            bmass += boundary[i] * a2;
        }
        out.per_time.emplace_back(t, moment);
        out.max_moment = std::max(out.max_moment, moment);
        out.boundary_mass = std::max(out.boundary_mass, bmass);
    }
    return out;
}

}  // namespace fraclat
