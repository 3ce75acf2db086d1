#pragma once

#include <map>
#include <string>
#include <vector>

#include "weyl/trig_poly.hpp"

namespace weyl {

/// Principal symbol p(x, xi) = a_m(x) xi^m of an order-m differential
/// operator on the circle, together with its lower-order coefficients.
///
/// Construction validates ellipticity, the symmetry p(x,-xi) = p(x,xi) and
/// that arg p omits an open arc; the omitted arc fixes the branch used to
/// lift F = arg p to a continuous function on the cosphere bundle.
class SymbolModel {
public:
    static constexpr int kGrid = 4096;
    static constexpr int kMaxJetOrder = 8;

    /// `coeffs` maps derivative order alpha (0..m) to a_alpha(x); the entry
    /// alpha = m is the principal part. Entries with alpha > m are rejected.
    static SymbolModel create(int order_m, std::map<int, TrigPoly> coeffs, int dim_n = 1);

    int order() const { return order_m_; }
    int dim() const { return dim_n_; }
    const TrigPoly& top() const { return coeffs_.at(order_m_); }
    const std::map<int, TrigPoly>& coefficients() const { return coeffs_; }

    /// Largest trig-polynomial degree over all coefficients.
    int bandwidth() const;
    /// True when every coefficient is x-independent.
    bool constant_coefficients() const;

    /// p(x, omega) on the cosphere bundle, omega = +1 or -1.
    cplx on_cosphere(double x, int omega) const;

    /// Lifted branch centre: F takes values in (centre - pi, centre + pi).
    double arg_center() const { return arg_center_; }
    /// Width of the largest arc omitted by arg p (sampled on the grid).
    double range_gap() const { return range_gap_; }
    double min_abs() const { return min_abs_; }
    double max_abs() const { return max_abs_; }
    double ellipticity_floor() const { return 1e-12 * max_abs_; }

    /// Max over the grid of |F^(k)|, k = 1..kMaxJetOrder (index k-1).
    const std::vector<double>& jet_scales() const { return jet_scales_; }

    /// Sorted zeros of F' in [0, 2pi) for the given omega.
    const std::vector<double>& critical_points(int omega) const {
        return omega > 0 ? critical_plus_ : critical_minus_;
    }

private:
    SymbolModel() = default;
    void analyse();

    int order_m_ = 2;
    int dim_n_ = 1;
    std::map<int, TrigPoly> coeffs_;
    double arg_center_ = 0.0;
    double range_gap_ = 0.0;
    double min_abs_ = 0.0;
    double max_abs_ = 0.0;
    std::vector<double> jet_scales_;
    std::vector<double> critical_plus_;
    std::vector<double> critical_minus_;
};

/// p(x, xi) = sum_{|alpha| = m} a_alpha(x) xi^alpha.
cplx eval_symbol(const SymbolModel& model, double x, double xi);

/// F(x, omega) = arg p(x, omega) on the lifted branch (not reduced mod 2pi).
/// Throws NumericalError if |p| falls below the ellipticity floor.
double arg_function(const SymbolModel& model, double x, int omega);

/// F^(1), ..., F^(order) at (x, omega), from exact derivatives of the
/// coefficient trig polynomials.
std::vector<double> arg_jets(const SymbolModel& model, double x, int omega, int order);

/// Points of [0, 2pi) where F(., omega) crosses theta (mod 2pi), located on
/// the monotone pieces between critical points and refined by bisection.
/// Tangential contacts without a sign change are not reported.
std::vector<double> level_crossings(const SymbolModel& model, int omega, double theta);

enum class Verdict { holds, fails, inconclusive };
std::string to_string(Verdict v);

struct LevelPoint {
    enum class Kind { crossing, grid_zero, tangency };
    double x = 0.0;
    int omega = 1;
    Kind kind = Kind::crossing;
    double residual = 0.0;          // F(x) - theta0 on the lifted branch
    std::vector<double> jets;       // F^(1..n0)
    bool degenerate = false;        // every jet within threshold
    bool resolved = true;           // level-set membership certain
};

struct ArgLevelSet {
    double theta0 = 0.0;
    std::vector<LevelPoint> points;
    bool continuum = false;         // F == theta0 along a run of grid points
};

struct NondegeneracyOptions {
    int grid = SymbolModel::kGrid;
    double root_tol = 1e-12;
    double jet_rel_threshold = 1e-8;
    double jet_abs_floor = 1e-12;
    double tangency_tol = 1e-9;
    double cluster_tol = 1e-9;
};

struct NondegeneracyResult {
    Verdict verdict = Verdict::holds;
    ArgLevelSet witness;
    std::vector<double> thresholds;  // per jet order 1..n0
    std::string detail;
    bool holds() const { return verdict == Verdict::holds; }
};

/// Tests whether some derivative of F of order 1..n0 is nonzero at every
/// point of the level set {F = theta0}. An empty level set holds vacuously.
NondegeneracyResult check_nondegeneracy(const SymbolModel& model, double theta0, int n0,
                                        const NondegeneracyOptions& opts = {});

}  // namespace weyl
