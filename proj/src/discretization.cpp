#include "weyl/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

#include "weyl/errors.hpp"
#include "weyl/hash.hpp"
#include "weyl/random.hpp"

namespace weyl {

namespace {

double int_power(int k, int alpha) {
    double r = 1.0;
    for (int i = 0; i < alpha; ++i) r *= k;
    return r;
}

std::string symbol_fingerprint(const SymbolModel& model) {
    std::ostringstream raw;
    raw.precision(17);
    raw << "m=" << model.order();
    for (const auto& [alpha, poly] : model.coefficients()) {
        raw << ";a" << alpha << ':';
        const TrigPoly t = poly.trimmed();
        for (const auto& c : t.coefficients()) raw << c.real() << ',' << c.imag() << ' ';
    }
    return "symbol:" + hex64(fnv1a(raw.str()));
}

void add_multiplication(Eigen::MatrixXcd& a, const TrigPoly& q, int modes_K) {
    const int d = std::min(q.degree(), 2 * modes_K);
    const int n = 2 * modes_K + 1;
    for (int row = 0; row < n; ++row)
        for (int off = -d; off <= d; ++off) {
            const int col = row - off;
            if (col >= 0 && col < n) a(row, col) += q.coeff(off);
        }
}

}  // namespace

OperatorProvenance describe_operator(const SymbolModel& model, bool has_potential, bool symmetrized,
                                     int potential_degree, const std::string& potential_tag) {
    OperatorProvenance prov;
    prov.description = symbol_fingerprint(model);
    if (has_potential) prov.description += "+" + potential_tag;
    if (symmetrized) prov.description += "+symmetrized";
    prov.order_m = model.order();
    prov.bandwidth = std::max(model.bandwidth(), has_potential ? potential_degree : 0);
    prov.has_potential = has_potential;
    prov.symmetrized = symmetrized;
    if (!has_potential && model.constant_coefficients()) {
        prov.constant_symbol.assign(static_cast<std::size_t>(model.order()) + 1, cplx{0.0});
        for (const auto& [alpha, poly] : model.coefficients())
            prov.constant_symbol[static_cast<std::size_t>(alpha)] = poly.coeff(0);
        if (symmetrized)
            for (std::size_t alpha = 1; alpha < prov.constant_symbol.size(); alpha += 2)
                prov.constant_symbol[alpha] = 0.0;
    }
    return prov;
}

DiscretizedOperator assemble_operator(const SymbolModel& model, int modes_K) {
    if (modes_K < model.bandwidth())
        throw ConfigError("assemble: modes_K = " + std::to_string(modes_K) + " is below the coefficient bandwidth " +
                          std::to_string(model.bandwidth()));
    DiscretizedOperator op;
    op.modes_K = modes_K;
    op.provenance = describe_operator(model, false, false);
    const int n = 2 * modes_K + 1;
    op.matrix = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& [alpha, poly] : model.coefficients()) {
        const int d = poly.degree();
        for (int row = 0; row < n; ++row)
            for (int off = -d; off <= d; ++off) {
                const int col = row - off;
                if (col < 0 || col >= n) continue;
                op.matrix(row, col) += poly.coeff(off) * int_power(col - modes_K, alpha);
            }
    }
    return op;
}

DiscretizedOperator add_potential(const DiscretizedOperator& op, const TrigPoly& potential,
                                  const std::string& potential_tag) {
    DiscretizedOperator out = op;
    add_multiplication(out.matrix, potential, op.modes_K);
    out.provenance.description += "+" + potential_tag;
    out.provenance.has_potential = true;
    out.provenance.bandwidth = std::max(out.provenance.bandwidth, std::min(potential.degree(), 2 * op.modes_K));
    out.provenance.constant_symbol.clear();
    return out;
}

DiscretizedOperator assemble_operator(const SymbolModel& model, const TrigPoly& potential, int modes_K,
                                      const std::string& potential_tag) {
    return add_potential(assemble_operator(model, modes_K), potential, potential_tag);
}

Eigen::MatrixXcd conj_flip(const Eigen::MatrixXcd& a) {
    return a.reverse().conjugate();
}

DiscretizedOperator symmetrize(const DiscretizedOperator& op) {
    DiscretizedOperator out = op;
    // Gamma A^* Gamma = J A^T J, J the index reversal k -> -k.
    const Eigen::MatrixXcd flipped = op.matrix.transpose().reverse();
    out.matrix = 0.5 * (op.matrix + flipped);
    if (!out.provenance.symmetrized) out.provenance.description += "+symmetrized";
    out.provenance.symmetrized = true;
    for (std::size_t alpha = 1; alpha < out.provenance.constant_symbol.size(); alpha += 2)
        out.provenance.constant_symbol[alpha] = 0.0;
    return out;
}

double adjoint_symmetry_test(const DiscretizedOperator& op, int trials, std::uint64_t seed) {
    const Eigen::Index n = op.matrix.rows();
    const double norm_a = op.matrix.norm();
    if (norm_a == 0.0 || n == 0) return 0.0;
    double worst = 0.0;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
        Eigen::VectorXcd u(n), v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double re = normal(rng), im = normal(rng);
            u(i) = cplx{re, im};
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double re = normal(rng), im = normal(rng);
            v(i) = cplx{re, im};
        }
        // (Gamma w)_k = conj(w_{-k})
        auto gamma = [](const Eigen::VectorXcd& w) -> Eigen::VectorXcd { return w.reverse().conjugate(); };
        const Eigen::VectorXcd au = op.matrix * u;
        const Eigen::VectorXcd gagv = gamma(op.matrix * gamma(v));
        // (x|y) = sum x_i conj(y_i)
        const cplx lhs = v.dot(au);
        const cplx rhs = gagv.dot(u);
        worst = std::max(worst, std::abs(lhs - rhs) / (u.norm() * v.norm() * norm_a));
    }
    return worst;
}

double exact_window(const std::vector<cplx>& symbol, int modes_K) {
    if (symbol.empty() || symbol.back() == cplx{0.0}) throw ConfigError("exact window: missing principal coefficient");
    const int m = static_cast<int>(symbol.size()) - 1;
    auto eval = [&](int k) {
        cplx s = 0.0;
        for (int alpha = m; alpha >= 0; --alpha) s = s * static_cast<double>(k) + symbol[static_cast<std::size_t>(alpha)];
        return std::abs(s);
    };
    double lower_sum = 0.0;
    for (int alpha = 0; alpha < m; ++alpha) lower_sum += std::abs(symbol[static_cast<std::size_t>(alpha)]);
    const double top = std::abs(symbol.back());
    // Past k_dom the principal term dominates and |p(k)| is increasing.
    const int k_dom = static_cast<int>(std::ceil(2.0 * lower_sum / top)) + 1;
    double best = std::numeric_limits<double>::infinity();
    for (int k = modes_K + 1;; ++k) {
        best = std::min({best, eval(k), eval(-k)});
        const double kk = k + 1;
        const double bound = top * std::pow(kk, m) - lower_sum * std::pow(kk, m - 1);
        if (k >= k_dom && bound >= best) break;
    }
    return best;
}

double trusted_window(const OperatorProvenance& prov, int modes_K) {
    if (!prov.constant_symbol.empty()) return exact_window(prov.constant_symbol, modes_K);
    return std::pow(modes_K / 4.0, prov.order_m);
}

double trusted_window(const DiscretizedOperator& op) {
    return trusted_window(op.provenance, op.modes_K);
}

int required_modes(const OperatorProvenance& prov, double radius) {
    int k = std::max(prov.bandwidth, 1);
    if (prov.constant_symbol.empty())
        k = std::max(k, static_cast<int>(std::floor(4.0 * std::pow(std::max(radius, 0.0), 1.0 / prov.order_m))) - 1);
    while (trusted_window(prov, k) < radius) ++k;
    return k;
}

std::string matrix_csv(const DiscretizedOperator& op) {
    std::ostringstream out;
    out.precision(17);
    nlohmann::json header = {{"modes_K", op.modes_K},
                             {"provenance", op.provenance.description},
                             {"provenance_hash", hex64(fnv1a(op.provenance.description))}};
    out << "# " << header.dump() << '\n' << "row_mode,col_mode,re,im\n";
    for (Eigen::Index c = 0; c < op.matrix.cols(); ++c)
        for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
            const cplx v = op.matrix(r, c);
            if (v == cplx{0.0}) continue;
            out << r - op.modes_K << ',' << c - op.modes_K << ',' << v.real() << ',' << v.imag() << '\n';
        }
    return out.str();
}

}  // namespace weyl
