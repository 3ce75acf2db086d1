#pragma once

#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include "weyl/angles.hpp"
#include "weyl/quadrature.hpp"
#include "weyl/symbol.hpp"
#include "weyl/trig_poly.hpp"

namespace weyl {

/// Positive radial profile g(theta): a constant or a real trig polynomial.
class RadialProfile {
public:
    RadialProfile() = default;
    explicit RadialProfile(double c) : constant_(c) {}
    explicit RadialProfile(TrigPoly poly) : poly_(std::move(poly)) {}

    double operator()(double theta) const { return poly_ ? (*poly_)(theta).real() : constant_; }
    bool is_constant() const { return !poly_.has_value(); }
    const std::optional<TrigPoly>& poly() const { return poly_; }
    double constant_value() const { return constant_; }

    /// Min and max over [a, b], sampled densely.
    std::pair<double, double> bounds(double a, double b) const;

private:
    double constant_ = 1.0;
    std::optional<TrigPoly> poly_;
};

enum class RadialClosure {
    closed,     // r1 g <= |z| <= r2 g
    half_open,  // r1 g <= |z| <  r2 g (dyadic annuli tile without overlap)
};

/// Curvilinear sector { r e^{i theta} : theta1 <= theta <= theta2,
/// r1 g(theta) <= r <= r2 g(theta) }. Angles are lifted reals with
/// 0 <= theta2 - theta1 <= 2 pi; theta2 - theta1 = 2 pi is the full turn.
struct SectorSpec {
    double theta1 = 0.0;
    double theta2 = kTwoPi;
    double r1 = 0.0;
    double r2 = 1.0;
    RadialProfile g{};
    RadialClosure closure = RadialClosure::closed;

    bool full_angle() const { return theta2 - theta1 >= kTwoPi * (1.0 - 1e-15); }
    /// Lifted angle of `phi` relative to theta1, or nullopt when outside.
    std::optional<double> angle_in(double phi) const;
    double max_g() const { return g.bounds(theta1, theta2).second; }
    /// Throws ConfigError when the invariants (g > 0, r1 <= r2, angles) fail.
    void validate() const;
    SectorSpec with_radii(double new_r1, double new_r2) const;
};

bool sector_membership(std::complex<double> z, const SectorSpec& sector);

/// Distance from z to the boundary of the sector (used for grazing flags).
double distance_to_boundary(std::complex<double> z, const SectorSpec& sector);

/// vol { (x, xi) in T*S^1 : p(x, xi) in sector }.
QuadratureResult sector_volume(const SymbolModel& model, const SectorSpec& sector,
                               const QuadratureOptions& opts = {});

/// V_z(t) = vol { (x, xi) : |p(x, xi) - z|^2 <= t }.
QuadratureResult v_z_of_t(const SymbolModel& model, std::complex<double> z, double t,
                          const QuadratureOptions& opts = {});

/// Curve r = scale * g(theta), theta in [theta_a, theta_b] (full circle when
/// the span is 2 pi).
struct ProfileArc {
    double scale = 1.0;
    RadialProfile g{};
    double theta_a = 0.0;
    double theta_b = kTwoPi;
};

/// Radial segment [r1, r2] e^{i theta0}.
struct RadialSegment {
    double theta0 = 0.0;
    double r1 = 1.0;
    double r2 = 2.0;
};

/// Boundary of a sector: two profile arcs and two radial segments, with the
/// tube volume bounded by the sum over pieces (overlaps at corners are not
/// subtracted).
struct SectorBoundary {
    SectorSpec sector;
};

struct TubeSpec {
    std::variant<ProfileArc, RadialSegment, SectorBoundary> curve;
    double thickness = 0.0;
};

struct TubeVolume {
    double value = 0.0;
    double error = 0.0;
    bool subadditive_bound = false;  // true for SectorBoundary
};

/// vol p^{-1}(gamma + D(0, t)).
TubeVolume tube_volume(const SymbolModel& model, const TubeSpec& tube, const QuadratureOptions& opts = {});

}  // namespace weyl
