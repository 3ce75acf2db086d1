#include "weyl/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "weyl/errors.hpp"
#include "weyl/parallel.hpp"
#include "weyl/random.hpp"

namespace weyl {

namespace {

// mu^{2s} sigma^2 for wavenumber k.
double weighted_variance(const PerturbationSpec& spec, double s_order, int k) {
    const double mu = std::sqrt(static_cast<double>(k) * k + 1.0);
    double v = std::pow(mu, 2.0 * (s_order - spec.rho));
    if (spec.beta > 0.0) v *= std::exp(-2.0 * std::pow(mu, spec.beta / (spec.m_exponent() + 1.0)));
    return v;
}

// sum over wavenumbers k > modes (two basis functions each).
double tail_sum(const PerturbationSpec& spec, double s_order, int modes) {
    const int k_end = 64 * (modes + 1);
    double sum = 0.0;
    for (int k = k_end; k > modes; --k) sum += 2.0 * weighted_variance(spec, s_order, k);
    // Remainder by the midpoint integral of 2 x^{2(s-rho)}; an upper bound
    // when beta > 0.
    const double p = 2.0 * (s_order - spec.rho) + 1.0;
    sum += 2.0 * std::pow(k_end + 0.5, p) / (-p);
    return sum;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double RTildeBasis::mu(std::size_t j) {
    const double k = wavenumber(j);
    return std::sqrt(k * k + 1.0);
}

double PerturbationSpec::m_exponent() const {
    const double n = dim_n;
    return (3.0 * n - 0.5) / (s - n / 2.0 - eps);
}

void PerturbationSpec::validate() const {
    const double n = dim_n;
    if (dim_n != 1) throw ConfigError("perturbation: only n = 1 is supported");
    if (!(rho > n)) throw ConfigError("perturbation: need rho > n");
    if (!(s > n / 2.0 && s < rho - n / 2.0)) throw ConfigError("perturbation: need n/2 < s < rho - n/2");
    if (!(eps > 0.0 && eps < s - n / 2.0)) throw ConfigError("perturbation: need 0 < eps < s - n/2");
    if (!(beta >= 0.0 && beta < 0.5)) throw ConfigError("perturbation: need 0 <= beta < 1/2");
    if (cutoff_j && *cutoff_j == 0) throw ConfigError("perturbation: cutoff_J must be positive");
}

double sigma_schedule(const PerturbationSpec& spec, std::size_t j) {
    const double mu = RTildeBasis::mu(j);
    double sigma = std::pow(mu, -spec.rho);
    if (spec.beta > 0.0) sigma *= std::exp(-std::pow(mu, spec.beta / (spec.m_exponent() + 1.0)));
    return sigma;
}

CutoffChoice resolve_cutoff(const PerturbationSpec& spec, double tol, std::size_t j_cap) {
    spec.validate();
    const int cap_modes = static_cast<int>((j_cap - 1) / 2);
    auto ratio = [&](int modes) {
        const double kept = expected_hs_norm_sq(spec, spec.s, RTildeBasis::size_for_modes(modes));
        return tail_sum(spec, spec.s, modes) / kept;
    };
    int hi = 1;
    while (hi < cap_modes && ratio(hi) >= tol) hi = std::min(2 * hi, cap_modes);
    CutoffChoice out;
    if (ratio(hi) >= tol) {
        out.j = RTildeBasis::size_for_modes(hi);
        out.tail_ratio = ratio(hi);
        out.capped = true;
        return out;
    }
    int lo = hi / 2;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (ratio(mid) < tol ? hi : lo) = mid;
    }
    out.j = RTildeBasis::size_for_modes(hi);
    out.tail_ratio = ratio(hi);
    return out;
}

RandomPotential sample_potential(const PerturbationSpec& spec, std::uint64_t seed, std::size_t cutoff_j) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RandomPotential pot;
    pot.seed = seed;
    pot.alphas.resize(cutoff_j);
    for (std::size_t j = 0; j < cutoff_j; ++j) {
        const double scale = sigma_schedule(spec, j) * std::numbers::sqrt2 / 2.0;
        const double re = normal(rng);
        const double im = normal(rng);
        pot.alphas[j] = scale * cplx{re, im};
    }
    return pot;
}

TrigPoly potential_fourier(const RandomPotential& pot) {
    if (pot.alphas.empty()) return TrigPoly::constant(0.0);
    const int d = RTildeBasis::wavenumber(pot.alphas.size() - 1);
    std::vector<cplx> c(2 * static_cast<std::size_t>(d) + 1, cplx{0.0});
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double half_inv_sqrt_pi = 0.5 / std::sqrt(std::numbers::pi);
    const cplx i{0.0, 1.0};
    c[static_cast<std::size_t>(d)] += pot.alphas[0] * inv_sqrt_2pi;
    for (std::size_t j = 1; j < pot.alphas.size(); ++j) {
        const int k = RTildeBasis::wavenumber(j);
        const cplx a = pot.alphas[j] * half_inv_sqrt_pi;
        if (RTildeBasis::is_sine(j)) {
            c[static_cast<std::size_t>(d + k)] += a / i;
            c[static_cast<std::size_t>(d - k)] -= a / i;
        } else {
            c[static_cast<std::size_t>(d + k)] += a;
            c[static_cast<std::size_t>(d - k)] += a;
        }
    }
    return TrigPoly::from_exponential(std::move(c));
}

double hs_norm(const RandomPotential& pot, double s_order) {
    double sum = 0.0;
    for (std::size_t j = 0; j < pot.alphas.size(); ++j)
        sum += std::pow(RTildeBasis::mu(j), 2.0 * s_order) * std::norm(pot.alphas[j]);
    return std::sqrt(sum);
}

double expected_hs_norm_sq(const PerturbationSpec& spec, double s_order, std::size_t cutoff_j) {
    double sum = 0.0;
    for (std::size_t j = cutoff_j; j-- > 0;) {
        const double sg = sigma_schedule(spec, j);
        sum += std::pow(RTildeBasis::mu(j), 2.0 * s_order) * sg * sg;
    }
    return sum;
}

std::string potential_csv(const RandomPotential& pot) {
    std::ostringstream out;
    out.precision(17);
    out << "j,mu,re_alpha,im_alpha\n";
    for (std::size_t j = 0; j < pot.alphas.size(); ++j)
        out << j << ',' << RTildeBasis::mu(j) << ',' << pot.alphas[j].real() << ',' << pot.alphas[j].imag() << '\n';
    return out.str();
}

double tail_bound_rhs(const TailBoundInput& input) {
    double sum = 0.0, mx = 0.0;
    for (double s : input.sigma_hats) {
        sum += s * s;
        mx = std::max(mx, s * s);
    }
    if (!(mx > 0.0)) throw ConfigError("tail bound: need max sigma_hat^2 > 0");
    const double v = std::exp(-(input.t - input.c0 * sum) / (2.0 * mx));
    return std::min(1.0, v);
}

TailBoundCheck verify_tail_bound(const TailBoundInput& input, std::size_t trials, std::uint64_t seed,
                                 std::size_t prefix_len, unsigned workers) {
    if (input.sigma_hats.empty()) throw ConfigError("tail bound: empty family");
    prefix_len = std::clamp<std::size_t>(prefix_len, 1, input.sigma_hats.size());
    constexpr std::size_t kChunks = 64;
    std::vector<std::size_t> full_hits(kChunks, 0), prefix_hits(kChunks, 0);
    parallel_for(kChunks, workers, [&](std::size_t c) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t tr = c; tr < trials; tr += kChunks) {
            Rng rng(derive_seed(seed, {tr}));
            double sum = 0.0, prefix = 0.0;
            for (std::size_t j = 0; j < input.sigma_hats.size(); ++j) {
                const double a = normal(rng), b = normal(rng);
                sum += 0.5 * input.sigma_hats[j] * input.sigma_hats[j] * (a * a + b * b);
                if (j + 1 == prefix_len) prefix = sum;
            }
            if (sum >= input.t) ++full_hits[c];
            if (prefix >= input.t) ++prefix_hits[c];
        }
    });
    std::size_t hits = 0, phits = 0;
    for (std::size_t c = 0; c < kChunks; ++c) {
        hits += full_hits[c];
        phits += prefix_hits[c];
    }
    TailBoundCheck out;
    const double n = static_cast<double>(trials);
    out.empirical = hits / n;
    out.mc_sigma = std::sqrt(std::max(out.empirical * (1.0 - out.empirical), 1.0 / n) / n);
    out.bound = tail_bound_rhs(input);
    out.dominated = out.empirical - 3.0 * out.mc_sigma <= out.bound;
    out.prefix_len = prefix_len;
    out.prefix_empirical = phits / n;
    TailBoundInput sub = input;
    sub.sigma_hats.resize(prefix_len);
    out.prefix_bound = tail_bound_rhs(sub);
    out.subfamily_monotone = out.prefix_empirical <= out.empirical;
    return out;
}

std::vector<TailBoundInput> standard_tail_matrix(double c0, std::size_t length) {
    std::vector<TailBoundInput> out;
    for (double r : {0.3, 0.5, 0.8}) {
        std::vector<double> sig(length);
        double sum = 0.0;
        for (std::size_t j = 0; j < length; ++j) {
            sig[j] = std::pow(r, static_cast<double>(j));
            sum += sig[j] * sig[j];
        }
        for (double mult : {2.0, 4.0, 8.0}) out.push_back({sig, mult * sum, c0});
    }
    return out;
}

C0Calibration calibrate_c0(std::vector<TailBoundInput> matrix, std::size_t trials, std::uint64_t seed,
                           double c0_start, double growth, int max_iterations, unsigned workers) {
    if (!(growth > 1.0)) throw ConfigError("calibrate_c0: growth factor must exceed 1");
    C0Calibration out;
    // The draws do not depend on c0; only the bound moves.
    std::vector<TailBoundCheck> base;
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        matrix[i].c0 = c0_start;
        base.push_back(verify_tail_bound(matrix[i], trials, derive_seed(seed, {i}), 1, workers));
    }
    double c0 = c0_start;
    for (int it = 0;; ++it) {
        bool all = true;
        for (std::size_t i = 0; i < matrix.size(); ++i) {
            matrix[i].c0 = c0;
            base[i].bound = tail_bound_rhs(matrix[i]);
            base[i].dominated = base[i].empirical - 3.0 * base[i].mc_sigma <= base[i].bound;
            all = all && base[i].dominated;
        }
        out.iterations = it;
        if (all) break;
        if (it >= max_iterations) throw NumericalError("calibrate_c0: no c0 reached domination");
        c0 *= growth;
    }
    out.c0 = c0;
    out.checks = std::move(base);
    return out;
}

Sc1Table prop_sc1_experiment(const PerturbationSpec& spec, int m, const std::vector<double>& h_list,
                             std::size_t trials, std::uint64_t seed, std::size_t cutoff_j, double c0,
                             unsigned workers) {
    spec.validate();
    if (m < 2) throw ConfigError("sc1 experiment: need m >= 2");
    for (double h : h_list)
        if (!(h > 0.0 && h <= 1.0)) throw ConfigError("sc1 experiment: h must lie in (0, 1]");

    std::vector<double> norms(trials);
    parallel_for(trials, workers, [&](std::size_t tr) {
        norms[tr] = hs_norm(sample_potential(spec, derive_seed(seed, {tr}), cutoff_j), spec.s);
    });

    double sum_w = 0.0, max_w = 0.0;
    for (std::size_t j = 0; j < cutoff_j; ++j) {
        const double sg = sigma_schedule(spec, j);
        const double w = std::pow(RTildeBasis::mu(j), 2.0 * spec.s) * sg * sg;
        sum_w += w;
        max_w = std::max(max_w, w);
    }

    Sc1Table table;
    table.m = m;
    table.s_order = spec.s;
    table.cutoff_j = cutoff_j;
    for (double h : h_list) {
        Sc1Row row;
        row.h = h;
        row.trials = trials;
        const double threshold = std::pow(h, 1.0 - m);  // ||h^m q|| <= h  <=>  ||q|| <= h^{1-m}
        row.failures = static_cast<std::size_t>(
            std::count_if(norms.begin(), norms.end(), [&](double v) { return v > threshold; }));
        row.failure_prob = static_cast<double>(row.failures) / static_cast<double>(trials);
        row.mc_sigma = std::sqrt(row.failure_prob * (1.0 - row.failure_prob) / static_cast<double>(trials));
        const double h2m = std::pow(h, 2.0 * m);
        row.sum_sigma_tilde_sq = h2m * sum_w;
        row.max_sigma_tilde_sq = h2m * max_w;
        row.analytic_bound = std::min(1.0, std::exp(-(h * h - c0 * row.sum_sigma_tilde_sq) / (2.0 * row.max_sigma_tilde_sq)));
        table.rows.push_back(row);
    }

    std::vector<Sc1Row> by_h = table.rows;
    std::sort(by_h.begin(), by_h.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
    table.monotone = true;
    for (std::size_t i = 1; i < by_h.size(); ++i)
        if (by_h[i].failure_prob > by_h[i - 1].failure_prob) table.monotone = false;

    std::vector<double> xs, ys;
    for (const auto& r : by_h) {
        if (r.failures == 0) continue;
        xs.push_back(std::pow(r.h, -2.0 * (m - 1)));
        ys.push_back(std::log(r.failure_prob));
    }
    if (xs.size() >= 2) {
        table.log_slope = least_squares_slope(xs, ys);
        table.fitted_c = -*table.log_slope;
    }
    return table;
}

}  // namespace weyl
