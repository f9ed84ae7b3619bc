#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "fraclat/laplacian.hpp"
#include "fraclat/saw.hpp"

namespace fraclat {

enum class DisorderFamily { uniform_symmetric, custom_density };

// One-site probability measure. The tau-regularity data (tau, M_tau) feed the
// a-priori bound; uniform on [-w, w] has tau = 1, M_1 = 1/w, density 1/(2w).
struct DisorderSpec {
    DisorderFamily family = DisorderFamily::uniform_symmetric;
    double half_width = 1.0;
    std::vector<double> density_x, density_p;  // tabulated density (custom)
    double tau = 1.0;
    double m_tau = 1.0;
    double density_bound = 0.5;

    static DisorderSpec uniform(double half_width);
    static DisorderSpec custom(const std::vector<double>& x, const std::vector<double>& p);
    void validate() const;
    double sample(uint64_t master_seed, uint64_t sample_index, uint64_t site_index) const;
};

struct ModelParams {
    FracLaplacianParams lap;
    DisorderSpec disorder;
    double lambda = 1.0;
    double s = 0.9;
    std::complex<double> z{0.5, 0.1};
    void validate() const;  // d/(d+2a) < s < tau, Im z != 0, lambda > 0
};

struct BoxGeometry {
    int d = 1;
    int L = 1;  // sites of [-L, L]^d
    std::vector<Offset> sites;
    static BoxGeometry cube(int d, int L);
    long size() const { return long(sites.size()); }
    long index_of(const Offset& x) const;
};

struct DerivedParams {
    double theta_s = 0.0;  // tau/(tau - s) M_tau^{s/tau}
    double alpha_s = 0.0;  // (s(d + 2 alpha) - d) / 2
    double gamma = 0.0;    // theta_s / lambda^s
};

DerivedParams derived_params(double s, double tau, double m_tau, double lambda, int d,
                             double alpha);

// Disorder thresholds. All kernel sums carry their certified truncation tails.
double threshold_am(double s, const DisorderSpec& disorder, const KernelTable& kernel);
double threshold_ag(double s, double beta, const DisorderSpec& disorder,
                    const KernelTable& kernel);
// lambda0(s) = (theta_s / R_chi)^{1/s} with the certified lower bound on the
// susceptibility radius; the sharpest of the three thresholds.
double threshold_saw(double s, const DisorderSpec& disorder,
                     const SawKernel& saw_kernel);

struct ThresholdReport {
    double s = 0.0, beta = 0.0;
    double lambda0 = 0.0, lambda_am = 0.0, lambda_ag = 0.0;
    double theta_s = 0.0, alpha_s = 0.0, gamma_at_3lambda0 = 0.0;
    double radius_bound_used = 0.0;
};
ThresholdReport threshold_chain(double s, double beta, const DisorderSpec& disorder,
                                const KernelTable& kernel, const SawKernel& saw_kernel);
void write_threshold_json(const ThresholdReport& rep, const std::string& path);

// the d = 1 comparison function g(s, lambda) built from the fitted kernel
// upper constant; g < 1 certifies lambda above the optimized threshold
double g_function(double s, double lambda, double c_upper, double alpha);

struct OptimizeResult {
    double s_star = 0.0;
    double lambda0_star = 0.0;
    std::vector<std::pair<double, double>> grid;          // (s, lambda0(s))
    std::vector<std::pair<double, double>> g_thresholds;  // (s, smallest lambda with g < 1)
};
OptimizeResult optimize_s(const DisorderSpec& disorder, const KernelTable& kernel,
                          const std::vector<double>& s_grid, double c_upper_for_g = 0.0);

std::vector<double> sample_disorder(const DisorderSpec& disorder, const BoxGeometry& box,
                                    uint64_t master_seed, uint64_t sample_index);

// H(x,y) = (-Delta)^alpha(x,y) + lambda omega_x delta_xy on the box; the
// kernel table must cover the box diameter.
Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const BoxGeometry& box,
                                  const KernelTable& kernel,
                                  const std::vector<double>& omega);

// One (H - z) factorization, many targets; verifies the residual of every
// solve to 1e-10 relative (one refinement pass, then SolveFailed).
class GreensSolver {
  public:
    GreensSolver(const Eigen::MatrixXd& H, std::complex<double> z);
    std::complex<double> entry(long xi, long yi);
    const Eigen::VectorXcd& column(long yi);

  private:
    Eigen::MatrixXcd shifted_;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    double scale_ = 0.0;
    std::vector<Eigen::VectorXcd> columns_;
    std::vector<char> have_;
};

std::complex<double> greens_entry(const Eigen::MatrixXd& H, std::complex<double> z,
                                  long xi, long yi);

struct McEstimate {
    Offset x0, x;
    double mean = 0.0;
    double std_error = 0.0;
    double median_of_means = 0.0;
    long n_samples = 0;
    uint64_t master_seed = 0;
    long discarded = 0;
};

std::vector<McEstimate> fractional_moment_mc(const ModelParams& params,
                                             const BoxGeometry& box,
                                             const KernelTable& kernel,
                                             const std::vector<std::pair<Offset, Offset>>& pairs,
                                             long n_samples, uint64_t master_seed);

void write_mc_csv(const std::vector<McEstimate>& rows, const std::string& path);
std::vector<McEstimate> read_mc_csv(int d, const std::string& path);

struct AprioriRow {
    double lambda = 0.0, s = 0.0;
    std::complex<double> z;
    double mean = 0.0, std_error = 0.0, bound = 0.0;
    bool pass = false;
};
struct AprioriReport {
    std::vector<AprioriRow> rows;
    double quadrature_max = 0.0;  // max over eta of int |v - eta|^{-s} dP0
    double quadrature_bound = 0.0;
    bool all_pass = false;
};

// E|G(x,x)|^s <= theta_s / lambda^s within 3 sigma on a (lambda, s, z) grid,
// plus the deterministic decoupling-integral oracle on an eta grid.
AprioriReport apriori_check(const ModelParams& base, const BoxGeometry& box,
                            const KernelTable& kernel, const std::vector<double>& lambdas,
                            const std::vector<double>& s_values,
                            const std::vector<std::complex<double>>& zs, long n_samples,
                            uint64_t master_seed);

// deterministic oracle int |v - eta|^{-s} dP0(v), quadrature route
double decoupling_integral(const DisorderSpec& disorder, double s,
                           std::complex<double> eta);

struct SawBoundRow {
    Offset offset;
    double mc_mean = 0.0, mc_stderr = 0.0;
    double saw_rhs = 0.0;     // gamma (C_gamma + tail)
    double power_rhs = 0.0;   // K0 theta_s / lambda^s |x|^{-(d+2alpha_s)}
    bool pass_saw = false, pass_power = false;
};
struct SawBoundReport {
    double gamma = 0.0, k0 = 0.0;
    std::vector<SawBoundRow> rows;
    bool all_pass = false;
};

SawBoundReport saw_bound_check(const ModelParams& params,
                               const std::vector<McEstimate>& mc,
                               const std::vector<TwoPointValue>& two_points, double gamma,
                               double k0);
void write_bound_json(const SawBoundReport& rep, const std::string& path);

struct EigenVectorDecay {
    Offset center;
    double fitted_t = 0.0;
    bool passes = false;
};
struct EigenDecayReport {
    std::vector<EigenVectorDecay> vectors;
    double median_t = 0.0;
    double fraction_passing = 0.0;
    double threshold_t = 0.0;
};

// Full symmetric eigendecomposition; per-vector least-squares decay exponent
// of log |phi|^2 against log(1 + |y - center|).
EigenDecayReport eigen_decay_analysis(const ModelParams& params, const BoxGeometry& box,
                                      const KernelTable& kernel,
                                      const std::vector<double>& omega, double slack);

struct DynamicalMomentResult {
    double max_moment = 0.0;
    std::vector<std::pair<double, double>> per_time;  // (t, moment)
    double boundary_mass = 0.0;  // sup_t mass beyond 0.9 L
};

// sup over the t grid of sum_{x != 0} |x|^beta |e^{-itH}(0,x)|^2, via the
// spectral decomposition. Finite-volume proxy; beta < 2 alpha.
DynamicalMomentResult dynamical_moment(const ModelParams& params, const BoxGeometry& box,
                                       const KernelTable& kernel,
                                       const std::vector<double>& omega, double beta,
                                       const std::vector<double>& t_grid);

}  // namespace fraclat
