#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weyl/trig_poly.hpp"

namespace weyl {

/// Real Fourier eigenbasis of R = -d^2/dx^2 + 1 on the circle, ordered by
/// eigenvalue: j = 0 is the constant 1/sqrt(2pi); j = 2k-1 and j = 2k are
/// cos(kx)/sqrt(pi) and sin(kx)/sqrt(pi), with mu_j = sqrt(k^2 + 1).
struct RTildeBasis {
    static int wavenumber(std::size_t j) { return static_cast<int>((j + 1) / 2); }
    static bool is_sine(std::size_t j) { return j > 0 && j % 2 == 0; }
    static double mu(std::size_t j);
    /// Basis size needed to hold every mode with |k| <= modes.
    static std::size_t size_for_modes(int modes) { return 2 * static_cast<std::size_t>(modes) + 1; }
};

/// Variance schedule and regularity parameters of the random potential.
struct PerturbationSpec {
    double rho = 2.0;
    double s = 0.75;
    double eps = 0.1;
    double beta = 0.0;
    int dim_n = 1;
    std::optional<std::size_t> cutoff_j;  // nullopt = automatic

    /// M = (3n - 1/2) / (s - n/2 - eps).
    double m_exponent() const;
    /// Throws ConfigError when rho > n, n/2 < s < rho - n/2,
    /// 0 < eps < s - n/2 or 0 <= beta < 1/2 is violated.
    void validate() const;
};

struct RandomPotential {
    std::vector<cplx> alphas;  // coefficients in the R-tilde eigenbasis
    std::uint64_t seed = 0;
};

/// sigma_j: mu^{-rho} for beta = 0, mu^{-rho} exp(-mu^{beta/(M+1)}) otherwise.
double sigma_schedule(const PerturbationSpec& spec, std::size_t j);

struct CutoffChoice {
    std::size_t j = 0;
    double tail_ratio = 0.0;  // neglected / retained part of sum mu^{2s} sigma^2
    bool capped = false;
};

/// Smallest basis size whose neglected tail sum_{j >= J} mu_j^{2s} sigma_j^2
/// is below `tol` times the retained sum, limited to `j_cap`.
CutoffChoice resolve_cutoff(const PerturbationSpec& spec, double tol = 1e-12,
                            std::size_t j_cap = RTildeBasis::size_for_modes(2048));

/// Independent complex Gaussians alpha_j with E|alpha_j|^2 = sigma_j^2
/// (real and imaginary parts each of variance sigma_j^2 / 2).
RandomPotential sample_potential(const PerturbationSpec& spec, std::uint64_t seed, std::size_t cutoff_j);

/// Exponential Fourier coefficients of q(x) = sum_j alpha_j e_j(x).
TrigPoly potential_fourier(const RandomPotential& pot);

/// (sum_j |mu_j^s alpha_j|^2)^{1/2}.
double hs_norm(const RandomPotential& pot, double s_order);

/// sum_j mu_j^{2s} sigma_j^2 over the first `cutoff_j` basis functions.
double expected_hs_norm_sq(const PerturbationSpec& spec, double s_order, std::size_t cutoff_j);

/// CSV rows "j,mu,re,im".
std::string potential_csv(const RandomPotential& pot);

// --- Gaussian tail bound -------------------------------------------------

struct TailBoundInput {
    std::vector<double> sigma_hats;  // standard deviations of the d_j
    double t = 1.0;
    double c0 = 1.0;
};

/// min(1, exp(-(t - c0 sum sigma^2) / (2 max sigma^2))).
double tail_bound_rhs(const TailBoundInput& input);

struct TailBoundCheck {
    double empirical = 0.0;
    double mc_sigma = 0.0;
    double bound = 0.0;
    bool dominated = false;
    std::size_t prefix_len = 0;
    double prefix_empirical = 0.0;
    double prefix_bound = 0.0;
    bool subfamily_monotone = false;  // prefix_empirical <= empirical
};

/// Monte Carlo estimate of P(sum |d_j|^2 >= t). The prefix subfamily reuses
/// the same draws, so its survival can never exceed the full family's.
TailBoundCheck verify_tail_bound(const TailBoundInput& input, std::size_t trials, std::uint64_t seed,
                                 std::size_t prefix_len = 1, unsigned workers = 1);

/// Geometric decays {0.3, 0.5, 0.8} x thresholds {2, 4, 8} * sum sigma^2.
std::vector<TailBoundInput> standard_tail_matrix(double c0 = 1.0, std::size_t length = 6);

struct C0Calibration {
    double c0 = 1.0;
    int iterations = 0;
    std::vector<TailBoundCheck> checks;
};

/// Raises c0 geometrically from `c0_start` until every configuration is
/// dominated (empirical - 3 sigma_MC <= bound).
C0Calibration calibrate_c0(std::vector<TailBoundInput> matrix, std::size_t trials, std::uint64_t seed,
                           double c0_start = 1.0, double growth = 1.05, int max_iterations = 400,
                           unsigned workers = 1);

// --- Semiclassical smallness of the potential ----------------------------

struct Sc1Row {
    double h = 0.0;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double failure_prob = 0.0;
    double mc_sigma = 0.0;
    double sum_sigma_tilde_sq = 0.0;
    double max_sigma_tilde_sq = 0.0;
    double analytic_bound = 1.0;  // tail bound at t = h^2 with the given c0
};

struct Sc1Table {
    int m = 2;
    double s_order = 0.0;
    std::size_t cutoff_j = 0;
    std::vector<Sc1Row> rows;
    bool monotone = false;              // failure non-increasing as h decreases
    std::optional<double> log_slope;    // log failure vs h^{-2(m-1)}
    std::optional<double> fitted_c;     // -slope
};

/// Estimates P(||h^m q||_{H^s} > h) for each h with one shared set of draws.
Sc1Table prop_sc1_experiment(const PerturbationSpec& spec, int m, const std::vector<double>& h_list,
                             std::size_t trials, std::uint64_t seed, std::size_t cutoff_j, double c0 = 1.0,
                             unsigned workers = 1);

}  // namespace weyl
