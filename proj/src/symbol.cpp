#include "weyl/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "weyl/angles.hpp"
#include "weyl/errors.hpp"

namespace weyl {

namespace {

double grid_x(int i, int n) { return kTwoPi * static_cast<double>(i) / static_cast<double>(n); }

// Bisection for a sign change of f on [a, b].
template <typename F>
double bisect(F&& f, double a, double b, double fa, double tol) {
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

std::vector<double> find_critical_points(const SymbolModel& model, int omega) {
    const int n = SymbolModel::kGrid;
    std::vector<double> d1(n);
    for (int i = 0; i < n; ++i) d1[i] = arg_jets(model, grid_x(i, n), omega, 1)[0];
    const double scale = model.jet_scales().empty() ? 0.0 : model.jet_scales()[0];
    std::vector<double> out;
    if (scale == 0.0) return out;  // F constant
    auto fprime = [&](double x) { return arg_jets(model, x, omega, 1)[0]; };
    for (int i = 0; i < n; ++i) {
        const double a = grid_x(i, n), b = grid_x(i + 1, n);
        const double fa = d1[i], fb = d1[(i + 1) % n];
        if (fa == 0.0) {
            out.push_back(a);
        } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
            out.push_back(bisect(fprime, a, b, fa, 1e-13));
        }
    }
    for (auto& x : out) x = wrap_two_pi(x);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

SymbolModel SymbolModel::create(int order_m, std::map<int, TrigPoly> coeffs, int dim_n) {
    if (dim_n != 1) throw ConfigError("symbol: only dimension n = 1 (the circle) is supported");
    if (order_m < 2) throw ConfigError("symbol: operator order m must be >= 2");
    for (const auto& [alpha, poly] : coeffs) {
        if (alpha < 0 || alpha > order_m)
            throw ConfigError("symbol: coefficient order " + std::to_string(alpha) + " outside [0, m]");
        (void)poly;
    }
    if (!coeffs.contains(order_m)) throw ConfigError("symbol: missing principal coefficient (alpha = m)");
    // For n = 1, p(x,-xi) = (-1)^m p(x,xi); with p elliptic this forces even m.
    if (order_m % 2 != 0)
        throw HypothesisError("symbol: p(x,-xi) = p(x,xi) fails for odd order m on the circle");
    SymbolModel m;
    m.order_m_ = order_m;
    m.dim_n_ = dim_n;
    for (auto& [alpha, poly] : coeffs) m.coeffs_.emplace(alpha, poly.trimmed());
    m.analyse();
    return m;
}

void SymbolModel::analyse() {
    const int n = kGrid;
    std::vector<double> args;
    args.reserve(2 * n);
    min_abs_ = std::numeric_limits<double>::infinity();
    max_abs_ = 0.0;
    double max_step = 0.0;  // largest arg change between neighbouring grid points
    for (int omega : {1, -1}) {
        for (int i = 0; i < n; ++i) {
            const cplx p = on_cosphere(grid_x(i, n), omega);
            min_abs_ = std::min(min_abs_, std::abs(p));
            max_abs_ = std::max(max_abs_, std::abs(p));
            args.push_back(wrap_two_pi(std::arg(p)));
            const cplx next = on_cosphere(grid_x((i + 1) % n, n), omega);
            if (std::abs(p) > 0.0 && std::abs(next) > 0.0) max_step = std::max(max_step, std::abs(std::arg(next / p)));
        }
    }
    if (!(max_abs_ > 0.0) || !(min_abs_ > 1e-12 * max_abs_))
        throw HypothesisError("symbol: not elliptic (|p| vanishes on the cosphere bundle)");

    std::sort(args.begin(), args.end());
    double best_gap = args.front() + kTwoPi - args.back();
    double gap_start = args.back();
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        const double g = args[i + 1] - args[i];
        if (g > best_gap) {
            best_gap = g;
            gap_start = args[i];
        }
    }
    range_gap_ = best_gap;
    // The omitted arc must be wider than what grid sampling can miss.
    if (range_gap_ < std::max(1e-3, 4.0 * max_step))
        throw HypothesisError("symbol: arg p covers the whole circle (range gap closed)");
    arg_center_ = wrap_two_pi(gap_start + 0.5 * best_gap + kPi);

    jet_scales_.assign(kMaxJetOrder, 0.0);
    for (int omega : {1, -1}) {
        for (int i = 0; i < n; ++i) {
            const auto j = arg_jets(*this, grid_x(i, n), omega, kMaxJetOrder);
            for (int k = 0; k < kMaxJetOrder; ++k) jet_scales_[k] = std::max(jet_scales_[k], std::abs(j[k]));
        }
    }
    // Roundoff-level variation of a constant symbol is not a critical structure.
    for (auto& s : jet_scales_)
        if (s < 1e-14) s = 0.0;
    critical_plus_ = find_critical_points(*this, 1);
    critical_minus_ = find_critical_points(*this, -1);
}

int SymbolModel::bandwidth() const {
    int d = 0;
    for (const auto& [alpha, poly] : coeffs_) d = std::max(d, poly.degree());
    return d;
}

bool SymbolModel::constant_coefficients() const { return bandwidth() == 0; }

cplx SymbolModel::on_cosphere(double x, int omega) const {
    const double sign = (omega < 0 && order_m_ % 2 != 0) ? -1.0 : 1.0;
    return top()(x) * sign;
}

cplx eval_symbol(const SymbolModel& model, double x, double xi) {
    return model.top()(x) * std::pow(xi, model.order());
}

double arg_function(const SymbolModel& model, double x, int omega) {
    const cplx p = model.on_cosphere(x, omega);
    if (std::abs(p) < model.ellipticity_floor())
        throw NumericalError("arg_function: |p| below ellipticity floor, branch lift failed");
    const double c = model.arg_center();
    return c + std::arg(p * std::polar(1.0, -c));
}

std::vector<double> arg_jets(const SymbolModel& model, double x, int omega, int order) {
    if (order <= 0) return {};
    // p^(j) for j = 0..order; the factor omega^m drops out of d/dx log p.
    (void)omega;
    const std::vector<cplx> p = model.top().jet(x, order);
    if (std::abs(p[0]) < model.ellipticity_floor())
        throw NumericalError("arg_jets: |p| below ellipticity floor");
    // q = p'/p and p^(k+1) = sum_{j<=k} C(k,j) q^(j) p^(k-j).
    std::vector<cplx> q(static_cast<std::size_t>(order));
    std::vector<double> out(static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        cplx acc = p[static_cast<std::size_t>(k + 1)];
        for (int j = 0; j < k; ++j) acc -= binomial(k, j) * q[j] * p[static_cast<std::size_t>(k - j)];
        q[k] = acc / p[0];
        out[k] = q[k].imag();
    }
    return out;
}

std::vector<double> level_crossings(const SymbolModel& model, int omega, double theta) {
    const double target = wrap_near(theta, model.arg_center());
    auto g = [&](double x) { return arg_function(model, x, omega) - target; };
    const auto& crit = model.critical_points(omega);
    std::vector<double> nodes;
    if (crit.empty()) {
        const int n = SymbolModel::kGrid;
        for (int i = 0; i <= n; ++i) nodes.push_back(grid_x(i, n));
    } else {
        nodes = crit;
        nodes.push_back(crit.front() + kTwoPi);
    }
    std::vector<double> roots;
    double ga = g(nodes[0]);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double a = nodes[i], b = nodes[i + 1];
        const double gb = g(b);
        if (ga != 0.0 && gb != 0.0 && (ga < 0.0) != (gb < 0.0)) {
            roots.push_back(wrap_two_pi(bisect(g, a, b, ga, 1e-13)));
        }
        ga = gb;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

NondegeneracyResult check_nondegeneracy(const SymbolModel& model, double theta0, int n0,
                                        const NondegeneracyOptions& opts) {
    if (n0 < 1 || n0 > SymbolModel::kMaxJetOrder)
        throw ConfigError("check_nondegeneracy: n0 must lie in [1, " +
                          std::to_string(SymbolModel::kMaxJetOrder) + "]");
    NondegeneracyResult result;
    result.witness.theta0 = wrap_two_pi(theta0);
    for (int k = 0; k < n0; ++k)
        result.thresholds.push_back(std::max(opts.jet_rel_threshold * model.jet_scales()[k], opts.jet_abs_floor));

    const double target = wrap_near(theta0, model.arg_center());
    const double exact_tol = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(target));
    const int n = opts.grid;

    for (int omega : {1, -1}) {
        auto g = [&](double x) { return arg_function(model, x, omega) - target; };
        std::vector<double> gv(n);
        for (int i = 0; i < n; ++i) gv[i] = g(grid_x(i, n));

        std::vector<LevelPoint> pts;
        // Exact grid hits; runs of three or more indicate a flat level set.
        int run = 0;
        for (int i = 0; i < n; ++i) {
            if (std::abs(gv[i]) <= exact_tol) {
                ++run;
                if (run == 1) pts.push_back({grid_x(i, n), omega, LevelPoint::Kind::grid_zero, gv[i], {}, false, true});
                if (run >= 3) result.witness.continuum = true;
            } else {
                run = 0;
            }
        }
        // Sign changes between grid nodes that are not themselves zeros.
        for (int i = 0; i < n; ++i) {
            const double ga = gv[i], gb = gv[(i + 1) % n];
            if (std::abs(ga) <= exact_tol || std::abs(gb) <= exact_tol) continue;
            if ((ga < 0.0) != (gb < 0.0)) {
                const double x = bisect(g, grid_x(i, n), grid_x(i + 1, n), ga, opts.root_tol);
                pts.push_back({wrap_two_pi(x), omega, LevelPoint::Kind::crossing, g(x), {}, false, true});
            }
        }
        // Tangential contacts at critical points of F.
        for (double c : model.critical_points(omega)) {
            const double r = g(c);
            if (std::abs(r) <= opts.tangency_tol)
                pts.push_back({c, omega, LevelPoint::Kind::tangency, r, {}, false, std::abs(r) <= exact_tol});
        }

        std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
        std::vector<LevelPoint> merged;
        for (auto& p : pts) {
            if (!merged.empty() && p.x - merged.back().x <= opts.cluster_tol) {
                auto& q = merged.back();
                // A crossing or an exact hit settles membership for the cluster.
                q.resolved = q.resolved || p.resolved;
                if (std::abs(p.residual) < std::abs(q.residual)) {
                    const bool res = q.resolved;
                    q = p;
                    q.resolved = res;
                }
                continue;
            }
            merged.push_back(p);
        }
        if (merged.size() > 1 && merged.front().x + kTwoPi - merged.back().x <= opts.cluster_tol) {
            merged.front().resolved = merged.front().resolved || merged.back().resolved;
            merged.pop_back();
        }

        for (auto& p : merged) {
            p.jets = arg_jets(model, p.x, omega, n0);
            p.degenerate = true;
            for (int k = 0; k < n0; ++k)
                if (std::abs(p.jets[k]) > result.thresholds[k]) p.degenerate = false;
            result.witness.points.push_back(std::move(p));
        }
    }

    bool any_fail = false, any_unresolved = false;
    std::ostringstream why;
    for (const auto& p : result.witness.points) {
        if (!p.degenerate) continue;
        if (p.resolved) {
            any_fail = true;
            why << "degenerate jets at x=" << p.x << " (omega=" << p.omega << "); ";
        } else {
            any_unresolved = true;
            why << "unresolved near-contact at x=" << p.x << " residual " << p.residual << "; ";
        }
    }
    if (result.witness.continuum) {
        any_fail = any_fail || std::any_of(result.witness.points.begin(), result.witness.points.end(),
                                           [](const auto& p) { return p.degenerate; });
        why << "level set contains a flat run; ";
    }
    if (any_fail) {
        result.verdict = Verdict::fails;
    } else if (any_unresolved) {
        result.verdict = Verdict::inconclusive;
    } else {
        result.verdict = Verdict::holds;
        if (result.witness.points.empty()) why << "empty level set";
    }
    result.detail = why.str();
    return result;
}

}  // namespace weyl
