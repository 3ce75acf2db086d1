#pragma once

#include <functional>
#include <vector>

namespace weyl {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // summed error estimate over pieces
};

struct QuadratureOptions {
    double abs_tol = 1e-9;
    double rel_tol = 1e-12;
};

/// Integrates f over [nodes.front(), nodes.back()], piece by piece between
/// consecutive nodes (f is assumed smooth inside each piece, with at worst
/// integrable endpoint singularities). Throws NumericalError when the
/// estimate exceeds max(abs_tol, rel_tol * |value|).
QuadratureResult integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& nodes,
                                  const QuadratureOptions& opts = {});

}  // namespace weyl
