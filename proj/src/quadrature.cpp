#include "weyl/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "weyl/errors.hpp"

namespace weyl {

QuadratureResult integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& nodes,
                                  const QuadratureOptions& opts) {
    thread_local boost::math::quadrature::tanh_sinh<double> tanh_sinh(15);
    QuadratureResult out;
    double l1_total = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double a = nodes[i], b = nodes[i + 1];
        if (!(b > a)) continue;
        double err = 0.0, l1 = 0.0;
        double v = 0.0;
        // Gauss-Kronrod first; tanh-sinh handles the sqrt-type endpoint
        // behaviour of tube and level-set integrands when G-K struggles.
        v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13, &err, &l1);
        if (!(err <= std::max(0.1 * opts.abs_tol, 1e-13 * l1))) {
            double e2 = 0.0, l2 = 0.0;
            std::size_t levels = 0;
            const double v2 = tanh_sinh.integrate(f, a, b, 1e-13, &e2, &l2, &levels);
            if (e2 < err) {
                v = v2;
                err = e2;
                l1 = l2;
            }
        }
        // On slivers a few ulps wide the Gauss/Kronrod difference is rounding
        // noise; the piece's own L1 mass already bounds its contribution.
        err = std::min(err, l1);
        out.value += v;
        out.error += err;
        l1_total += l1;
    }
    const double allowed = std::max(opts.abs_tol, opts.rel_tol * l1_total);
    if (!(out.error <= allowed) || !std::isfinite(out.value)) {
        std::ostringstream msg;
        msg << "quadrature did not converge: error estimate " << out.error << " exceeds " << allowed;
        throw NumericalError(msg.str());
    }
    return out;
}

}  // namespace weyl
