#pragma once

#include <complex>
#include <span>
#include <vector>

namespace weyl {

using cplx = std::complex<double>;

/// Finite complex Fourier series  f(x) = sum_{n=-d}^{d} c_n e^{i n x}.
class TrigPoly {
public:
    TrigPoly() : coeffs_(1, cplx{0.0}) {}

    static TrigPoly constant(cplx c);

    /// From exponential coefficients c_{-d..d}; size must be odd.
    static TrigPoly from_exponential(std::vector<cplx> coeffs);

    /// From f(x) = sum_k C_k cos(kx) + S_k sin(kx) with complex C_k, S_k
    /// (S_0 is ignored).
    static TrigPoly from_cos_sin(std::span<const cplx> cos_terms,
                                 std::span<const cplx> sin_terms);

    int degree() const { return static_cast<int>(coeffs_.size() / 2); }

    /// Exponential coefficient c_n; zero outside [-degree, degree].
    cplx coeff(int n) const {
        const int d = degree();
        return (n < -d || n > d) ? cplx{0.0} : coeffs_[static_cast<std::size_t>(n + d)];
    }

    const std::vector<cplx>& coefficients() const { return coeffs_; }

    cplx operator()(double x) const { return derivative(x, 0); }

    /// r-th derivative at x, computed exactly from the coefficients.
    cplx derivative(double x, int r) const;

    /// Derivatives 0..r at x in one pass.
    std::vector<cplx> jet(double x, int r) const;

    bool is_real() const;      // all values real (c_{-n} = conj c_n)
    bool is_constant() const;  // degree 0 after trimming zeros

    /// Drops trailing zero modes.
    TrigPoly trimmed() const;

    TrigPoly& operator+=(const TrigPoly& other);
    TrigPoly scaled(cplx s) const;

private:
    explicit TrigPoly(std::vector<cplx> c) : coeffs_(std::move(c)) {}
    std::vector<cplx> coeffs_;
};

}  // namespace weyl
