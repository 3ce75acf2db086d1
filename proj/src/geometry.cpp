#include "weyl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "weyl/errors.hpp"

namespace weyl {

namespace {

using Vec = std::complex<double>;

double dot(Vec a, Vec b) { return a.real() * b.real() + a.imag() * b.imag(); }

struct Interval {
    double lo;
    double hi;
};

// Values of rho with lo <= alpha*rho + beta <= hi.
std::optional<Interval> linear_band(double alpha, double beta, double lo, double hi) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (alpha == 0.0) {
        if (beta >= lo && beta <= hi) return Interval{-inf, inf};
        return std::nullopt;
    }
    double a = (lo - beta) / alpha, b = (hi - beta) / alpha;
    if (a > b) std::swap(a, b);
    return Interval{a, b};
}

std::optional<Interval> intersect(std::optional<Interval> a, std::optional<Interval> b) {
    if (!a || !b) return std::nullopt;
    Interval r{std::max(a->lo, b->lo), std::min(a->hi, b->hi)};
    if (r.lo > r.hi) return std::nullopt;
    return r;
}

// Ray {rho d : rho >= 0} against the disk |w - c| <= t.
std::optional<Interval> ray_disk(Vec d, Vec c, double t) {
    const double b = dot(d, c);
    const double disc = b * b - std::norm(c) + t * t;
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    return Interval{b - s, b + s};
}

// Ray against the stadium {w : dist(w, [A, B]) <= t}. The stadium is convex,
// so the hull of the rectangle and end-cap hits is the exact intersection.
std::optional<Interval> ray_stadium(Vec d, Vec a, Vec b, double t) {
    std::optional<Interval> hull;
    auto absorb = [&](std::optional<Interval> piece) {
        if (!piece) return;
        if (!hull) hull = piece;
        else hull = Interval{std::min(hull->lo, piece->lo), std::max(hull->hi, piece->hi)};
    };
    absorb(ray_disk(d, a, t));
    absorb(ray_disk(d, b, t));
    const double len = std::abs(b - a);
    if (len > 0.0) {
        const Vec e = (b - a) / len;
        const Vec nrm{-e.imag(), e.real()};
        absorb(intersect(linear_band(dot(d, e), -dot(a, e), 0.0, len),
                         linear_band(dot(d, nrm), -dot(a, nrm), -t, t)));
    }
    if (!hull) return std::nullopt;
    hull->lo = std::max(hull->lo, 0.0);
    if (hull->hi < hull->lo) return std::nullopt;
    return hull;
}

// Total length of the union of intervals, after mapping rho -> (rho/|P|)^(1/m).
double union_radial_length(std::vector<Interval>& ivs, double abs_p, int m) {
    if (ivs.empty()) return 0.0;
    std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    const double inv_m = 1.0 / m;
    double total = 0.0;
    Interval cur = ivs.front();
    auto flush = [&](const Interval& iv) {
        const double lo = std::max(iv.lo, 0.0);
        if (iv.hi > lo) total += std::pow(iv.hi / abs_p, inv_m) - std::pow(lo / abs_p, inv_m);
    };
    for (std::size_t i = 1; i < ivs.size(); ++i) {
        if (ivs[i].lo <= cur.hi) {
            cur.hi = std::max(cur.hi, ivs[i].hi);
        } else {
            flush(cur);
            cur = ivs[i];
        }
    }
    flush(cur);
    return total;
}

// One tube piece in the spectral plane.
class TubePiece {
public:
    virtual ~TubePiece() = default;
    virtual void ray_hits(Vec d, double phi, double t, std::vector<Interval>& out) const = 0;
    virtual std::vector<double> critical_angles(double t) const = 0;
};

void add_point_angles(Vec p, double t, std::vector<double>& out) {
    const double r = std::abs(p);
    if (r == 0.0) return;
    const double a = std::arg(p);
    out.push_back(a);
    if (t < r) {
        const double s = std::asin(t / r);
        out.push_back(a - s);
        out.push_back(a + s);
    }
}

class SegmentPiece final : public TubePiece {
public:
    SegmentPiece(Vec a, Vec b) : a_(a), b_(b) {}
    void ray_hits(Vec d, double, double t, std::vector<Interval>& out) const override {
        if (auto iv = ray_stadium(d, a_, b_, t)) out.push_back(*iv);
    }
    std::vector<double> critical_angles(double t) const override {
        std::vector<double> out;
        add_point_angles(a_, t, out);
        add_point_angles(b_, t, out);
        const double len = std::abs(b_ - a_);
        if (len > 0.0) {
            const Vec e = (b_ - a_) / len;
            const Vec nrm{-e.imag(), e.real()};
            for (Vec c : {a_ + t * nrm, a_ - t * nrm, b_ + t * nrm, b_ - t * nrm})
                if (std::abs(c) > 0.0) out.push_back(std::arg(c));
        }
        return out;
    }

private:
    Vec a_, b_;
};

class CircleArcPiece final : public TubePiece {
public:
    CircleArcPiece(double radius, double a, double b) : radius_(radius), a_(a), b_(b) {}
    bool full() const { return b_ - a_ >= kTwoPi * (1.0 - 1e-15); }
    void ray_hits(Vec d, double phi, double t, std::vector<Interval>& out) const override {
        if (full() || wrap_two_pi(phi - a_) <= b_ - a_) out.push_back({radius_ - t, radius_ + t});
        if (full()) return;
        if (auto iv = ray_disk(d, std::polar(radius_, a_), t)) out.push_back(*iv);
        if (auto iv = ray_disk(d, std::polar(radius_, b_), t)) out.push_back(*iv);
    }
    std::vector<double> critical_angles(double t) const override {
        std::vector<double> out;
        if (full()) return out;
        add_point_angles(std::polar(radius_, a_), t, out);
        add_point_angles(std::polar(radius_, b_), t, out);
        return out;
    }

private:
    double radius_, a_, b_;
};

// Non-constant profile: polyline through the curve with stadium tubes.
class PolylinePiece final : public TubePiece {
public:
    PolylinePiece(const ProfileArc& arc, int segments) {
        const bool closed = arc.theta_b - arc.theta_a >= kTwoPi * (1.0 - 1e-15);
        for (int i = 0; i <= segments; ++i) {
            const double th = arc.theta_a + (arc.theta_b - arc.theta_a) * i / segments;
            pts_.push_back(std::polar(arc.scale * arc.g(th), th));
        }
        if (closed) pts_.back() = pts_.front();
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            const double a1 = std::arg(pts_[i]), a2 = std::arg(pts_[i + 1]);
            double lo = a1, hi = a1 + wrap_near(a2 - a1, 0.0);
            if (lo > hi) std::swap(lo, hi);
            spans_.push_back({lo, hi, std::min(std::abs(pts_[i]), std::abs(pts_[i + 1]))});
        }
        closed_ = closed;
    }
    void ray_hits(Vec d, double phi, double t, std::vector<Interval>& out) const override {
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            const auto& s = spans_[i];
            const double margin = s.rmin > t ? std::asin(t / s.rmin) : kPi;
            const double mid = 0.5 * (s.lo + s.hi);
            if (std::abs(wrap_near(phi, mid) - mid) > 0.5 * (s.hi - s.lo) + margin + 1e-12) continue;
            if (auto iv = ray_stadium(d, pts_[i], pts_[i + 1], t)) out.push_back(*iv);
        }
    }
    std::vector<double> critical_angles(double t) const override {
        std::vector<double> out;
        if (closed_) return out;
        add_point_angles(pts_.front(), t, out);
        add_point_angles(pts_.back(), t, out);
        return out;
    }

private:
    struct Span {
        double lo, hi, rmin;
    };
    std::vector<Vec> pts_;
    std::vector<Span> spans_;
    bool closed_ = false;
};

std::unique_ptr<TubePiece> make_arc_piece(const ProfileArc& arc) {
    if (arc.g.is_constant()) return std::make_unique<CircleArcPiece>(arc.scale * arc.g.constant_value(), arc.theta_a, arc.theta_b);
    return std::make_unique<PolylinePiece>(arc, 4096);
}

std::vector<double> breakpoints_for(const SymbolModel& model, int omega, const std::vector<double>& angles) {
    std::vector<double> nodes{0.0, kTwoPi};
    for (double a : angles)
        for (double x : level_crossings(model, omega, a)) nodes.push_back(x);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

QuadratureResult tube_piece_volume(const SymbolModel& model, const TubePiece& piece, double t,
                                   const QuadratureOptions& opts) {
    QuadratureResult total;
    if (t <= 0.0) return total;
    const int m = model.order();
    const auto angles = piece.critical_angles(t);
    for (int omega : {1, -1}) {
        auto f = [&](double x) {
            const cplx p = model.on_cosphere(x, omega);
            const double phi = arg_function(model, x, omega);
            const Vec d = std::polar(1.0, phi);
            thread_local std::vector<Interval> ivs;
            ivs.clear();
            piece.ray_hits(d, phi, t, ivs);
            return union_radial_length(ivs, std::abs(p), m);
        };
        const auto r = integrate_pieces(f, breakpoints_for(model, omega, angles), opts);
        total.value += r.value;
        total.error += r.error;
    }
    return total;
}

}  // namespace

std::pair<double, double> RadialProfile::bounds(double a, double b) const {
    if (!poly_) return {constant_, constant_};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    constexpr int n = 2048;
    for (int i = 0; i <= n; ++i) {
        const double v = (*this)(a + (b - a) * i / n);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

std::optional<double> SectorSpec::angle_in(double phi) const {
    const double d = wrap_two_pi(phi - theta1);
    if (full_angle() || d <= theta2 - theta1) return theta1 + d;
    return std::nullopt;
}

void SectorSpec::validate() const {
    if (!std::isfinite(theta1) || !std::isfinite(theta2) || theta2 < theta1 || theta2 - theta1 > kTwoPi * (1.0 + 1e-15))
        throw ConfigError("sector: need 0 <= theta2 - theta1 <= 2 pi");
    if (theta1 < -kTwoPi || theta2 > 2.0 * kTwoPi) throw ConfigError("sector: angles out of range");
    if (!(r1 >= 0.0) || !(r2 >= r1) || !std::isfinite(r2)) throw ConfigError("sector: need 0 <= r1 <= r2 < inf");
    if (!g.is_constant() && !g.poly()->is_real()) throw ConfigError("sector: radial profile g must be real");
    if (!(g.bounds(theta1, theta2).first > 0.0)) throw ConfigError("sector: radial profile g must be positive");
}

SectorSpec SectorSpec::with_radii(double new_r1, double new_r2) const {
    SectorSpec s = *this;
    s.r1 = new_r1;
    s.r2 = new_r2;
    return s;
}

bool sector_membership(std::complex<double> z, const SectorSpec& sector) {
    if (z == 0.0) return sector.r1 == 0.0 && sector.theta2 >= sector.theta1;
    const auto th = sector.angle_in(std::arg(z));
    if (!th) return false;
    const double gv = sector.g(*th);
    const double r = std::abs(z);
    if (r < sector.r1 * gv) return false;
    return sector.closure == RadialClosure::closed ? r <= sector.r2 * gv : r < sector.r2 * gv;
}

double distance_to_boundary(std::complex<double> z, const SectorSpec& sector) {
    double best = std::numeric_limits<double>::infinity();
    const double r = std::abs(z);
    const double phi = std::arg(z);
    auto arc_distance = [&](double scale) {
        if (auto th = sector.angle_in(phi)) best = std::min(best, std::abs(r - scale * sector.g(*th)));
        if (!sector.full_angle()) {
            best = std::min(best, std::abs(z - std::polar(scale * sector.g(sector.theta1), sector.theta1)));
            best = std::min(best, std::abs(z - std::polar(scale * sector.g(sector.theta2), sector.theta2)));
        }
    };
    arc_distance(sector.r2);
    if (sector.r1 > 0.0) arc_distance(sector.r1);
    if (!sector.full_angle()) {
        for (double th : {sector.theta1, sector.theta2}) {
            const Vec a = std::polar(sector.r1 * sector.g(th), th), b = std::polar(sector.r2 * sector.g(th), th);
            const Vec ab = b - a;
            const double len2 = std::norm(ab);
            const double s = len2 > 0.0 ? std::clamp(dot(z - a, ab) / len2, 0.0, 1.0) : 0.0;
            best = std::min(best, std::abs(z - (a + s * ab)));
        }
    }
    return best;
}

QuadratureResult sector_volume(const SymbolModel& model, const SectorSpec& sector, const QuadratureOptions& opts) {
    sector.validate();
    QuadratureResult total;
    if (sector.r2 == 0.0) return total;
    const double inv_m = 1.0 / model.order();
    for (int omega : {1, -1}) {
        auto f = [&](double x) {
            const auto th = sector.angle_in(arg_function(model, x, omega));
            if (!th) return 0.0;
            const double gv = sector.g(*th);
            const double a = std::abs(model.on_cosphere(x, omega));
            return std::pow(sector.r2 * gv / a, inv_m) - std::pow(sector.r1 * gv / a, inv_m);
        };
        const auto nodes = breakpoints_for(model, omega, {sector.theta1, sector.theta2});
        const auto r = integrate_pieces(f, nodes, opts);
        total.value += r.value;
        total.error += r.error;
    }
    return total;
}

QuadratureResult v_z_of_t(const SymbolModel& model, std::complex<double> z, double t, const QuadratureOptions& opts) {
    if (t < 0.0) throw ConfigError("v_z_of_t: t must be >= 0");
    QuadratureResult total;
    if (t == 0.0) return total;
    const double inv_m = 1.0 / model.order();
    const double sqrt_t = std::sqrt(t);
    std::vector<double> angles;
    if (sqrt_t < std::abs(z)) {
        const double s = std::asin(sqrt_t / std::abs(z));
        const double a = std::arg(z);
        angles = {a - s, a + s, a + kPi - s, a + kPi + s};
    }
    for (int omega : {1, -1}) {
        auto f = [&](double x) {
            const cplx p = model.on_cosphere(x, omega);
            const double a2 = std::norm(p);
            const cplx w = std::conj(p) * z;
            const double disc = a2 * t - w.imag() * w.imag();
            if (disc <= 0.0) return 0.0;
            const double sq = std::sqrt(disc);
            const double up = (w.real() + sq) / a2, um = (w.real() - sq) / a2;
            if (up <= 0.0) return 0.0;
            return std::pow(up, inv_m) - std::pow(std::max(um, 0.0), inv_m);
        };
        const auto r = integrate_pieces(f, breakpoints_for(model, omega, angles), opts);
        total.value += r.value;
        total.error += r.error;
    }
    return total;
}

TubeVolume tube_volume(const SymbolModel& model, const TubeSpec& tube, const QuadratureOptions& opts) {
    if (!(tube.thickness >= 0.0)) throw ConfigError("tube_volume: thickness must be >= 0");
    TubeVolume out;
    auto accumulate = [&](const TubePiece& piece) {
        const auto r = tube_piece_volume(model, piece, tube.thickness, opts);
        out.value += r.value;
        out.error += r.error;
    };
    if (const auto* arc = std::get_if<ProfileArc>(&tube.curve)) {
        accumulate(*make_arc_piece(*arc));
    } else if (const auto* seg = std::get_if<RadialSegment>(&tube.curve)) {
        if (!(seg->r1 >= 0.0 && seg->r2 >= seg->r1)) throw ConfigError("tube_volume: need 0 <= r1 <= r2");
        accumulate(SegmentPiece(std::polar(seg->r1, seg->theta0), std::polar(seg->r2, seg->theta0)));
    } else {
        const auto& s = std::get<SectorBoundary>(tube.curve).sector;
        s.validate();
        out.subadditive_bound = true;
        accumulate(*make_arc_piece(ProfileArc{s.r2, s.g, s.theta1, s.theta2}));
        if (s.r1 > 0.0) accumulate(*make_arc_piece(ProfileArc{s.r1, s.g, s.theta1, s.theta2}));
        if (!s.full_angle()) {
            for (double th : {s.theta1, s.theta2})
                accumulate(SegmentPiece(std::polar(s.r1 * s.g(th), th), std::polar(s.r2 * s.g(th), th)));
        }
    }
    return out;
}

}  // namespace weyl
