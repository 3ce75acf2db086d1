#pragma once

#include <cmath>
#include <numbers>

namespace weyl {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle to [0, 2*pi).
inline double wrap_two_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

/// Shifts `a` by a multiple of 2*pi into (center - pi, center + pi].
inline double wrap_near(double a, double center) {
    double d = wrap_two_pi(a - center + kPi);  // in [0, 2pi)
    if (d == 0.0) d = kTwoPi;
    return center - kPi + d;
}

}  // namespace weyl
