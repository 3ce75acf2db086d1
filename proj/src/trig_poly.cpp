#include "weyl/trig_poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace weyl {

TrigPoly TrigPoly::constant(cplx c) { return TrigPoly(std::vector<cplx>{c}); }

TrigPoly TrigPoly::from_exponential(std::vector<cplx> coeffs) {
    if (coeffs.size() % 2 == 0) throw std::invalid_argument("TrigPoly: coefficient count must be odd");
    return TrigPoly(std::move(coeffs));
}

TrigPoly TrigPoly::from_cos_sin(std::span<const cplx> cos_terms, std::span<const cplx> sin_terms) {
    const std::size_t d = std::max<std::size_t>(
        {cos_terms.empty() ? 0 : cos_terms.size() - 1, sin_terms.empty() ? 0 : sin_terms.size() - 1});
    std::vector<cplx> c(2 * d + 1, cplx{0.0});
    if (!cos_terms.empty()) c[d] += cos_terms[0];
    const cplx i{0.0, 1.0};
    for (std::size_t k = 1; k <= d; ++k) {
        const cplx ck = k < cos_terms.size() ? cos_terms[k] : cplx{0.0};
        const cplx sk = k < sin_terms.size() ? sin_terms[k] : cplx{0.0};
        // cos kx = (e^{ikx} + e^{-ikx})/2, sin kx = (e^{ikx} - e^{-ikx})/(2i)
        c[d + k] += 0.5 * (ck - i * sk);
        c[d - k] += 0.5 * (ck + i * sk);
    }
    return TrigPoly(std::move(c)).trimmed();
}

cplx TrigPoly::derivative(double x, int r) const {
    const int d = degree();
    cplx sum = coeffs_[static_cast<std::size_t>(d)] * (r == 0 ? 1.0 : 0.0);
    for (int n = 1; n <= d; ++n) {
        const cplx e = std::polar(1.0, n * x);
        cplx wp = 1.0, wm = 1.0;
        if (r > 0) {
            wp = std::pow(cplx{0.0, static_cast<double>(n)}, r);
            wm = std::pow(cplx{0.0, -static_cast<double>(n)}, r);
        }
        sum += wp * coeffs_[static_cast<std::size_t>(d + n)] * e;
        sum += wm * coeffs_[static_cast<std::size_t>(d - n)] * std::conj(e);
    }
    return sum;
}

std::vector<cplx> TrigPoly::jet(double x, int r) const {
    const int d = degree();
    std::vector<cplx> out(static_cast<std::size_t>(r + 1), cplx{0.0});
    out[0] = coeffs_[static_cast<std::size_t>(d)];
    for (int n = 1; n <= d; ++n) {
        const cplx e = std::polar(1.0, n * x);
        cplx tp = coeffs_[static_cast<std::size_t>(d + n)] * e;
        cplx tm = coeffs_[static_cast<std::size_t>(d - n)] * std::conj(e);
        const cplx fp{0.0, static_cast<double>(n)};
        for (int k = 0; k <= r; ++k) {
            out[static_cast<std::size_t>(k)] += tp + tm;
            tp *= fp;
            tm *= -fp;
        }
    }
    return out;
}

bool TrigPoly::is_real() const {
    const int d = degree();
    for (int n = 0; n <= d; ++n) {
        const cplx a = coeff(n), b = std::conj(coeff(-n));
        if (std::abs(a - b) > 1e-15 * (1.0 + std::abs(a))) return false;
    }
    return true;
}

bool TrigPoly::is_constant() const { return trimmed().degree() == 0; }

TrigPoly TrigPoly::trimmed() const {
    int d = degree();
    while (d > 0 && coeff(d) == cplx{0.0} && coeff(-d) == cplx{0.0}) --d;
    std::vector<cplx> c(2 * static_cast<std::size_t>(d) + 1);
    for (int n = -d; n <= d; ++n) c[static_cast<std::size_t>(n + d)] = coeff(n);
    return TrigPoly(std::move(c));
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& other) {
    const int d = std::max(degree(), other.degree());
    std::vector<cplx> c(2 * static_cast<std::size_t>(d) + 1);
    for (int n = -d; n <= d; ++n) c[static_cast<std::size_t>(n + d)] = coeff(n) + other.coeff(n);
    coeffs_ = std::move(c);
    return *this;
}

TrigPoly TrigPoly::scaled(cplx s) const {
    std::vector<cplx> c = coeffs_;
    for (auto& v : c) v *= s;
    return TrigPoly(std::move(c));
}

}  // namespace weyl
