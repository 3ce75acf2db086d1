#include "weyl/spectra.hpp"

#include <algorithm>
#include <complex>
#include <sstream>
#include <tuple>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "weyl/errors.hpp"

namespace weyl {

RawSpectrum eigensolve(const DiscretizedOperator& op, const EigensolveOptions& opts) {
    const Eigen::Index n = op.matrix.rows();
    if (n != op.matrix.cols()) throw ConfigError("eigensolve: matrix is not square");
    RawSpectrum out;
    out.modes_K = op.modes_K;
    out.provenance = op.provenance.description;
    out.window = trusted_window(op);
    if (n == 0) return out;
    if (!op.matrix.allFinite())
        throw NumericalError("eigensolve: non-finite matrix entries (" + op.provenance.description + ")");

    Eigen::MatrixXcd work = op.matrix;  // column-major, overwritten by zgeev
    std::vector<cplx> w(static_cast<std::size_t>(n));
    Eigen::MatrixXcd vr;
    if (opts.certify) vr.resize(n, n);
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', opts.certify ? 'V' : 'N', static_cast<lapack_int>(n), work.data(),
                      static_cast<lapack_int>(n), w.data(), nullptr, 1, opts.certify ? vr.data() : nullptr,
                      static_cast<lapack_int>(opts.certify ? n : 1));
    if (info != 0)
        throw NumericalError("eigensolve: zgeev failed with info = " + std::to_string(info) + " (" +
                             op.provenance.description + ", K = " + std::to_string(op.modes_K) + ")");
    out.eigenvalues = std::move(w);

    if (opts.certify) {
        const double norm_a = op.matrix.norm();
        const Eigen::MatrixXcd av = op.matrix * vr;
        out.residuals.resize(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const cplx lambda = out.eigenvalues[static_cast<std::size_t>(i)];
            const double vnorm = vr.col(i).norm();
            const double r = (norm_a == 0.0 || vnorm == 0.0)
                                 ? 0.0
                                 : (av.col(i) - lambda * vr.col(i)).norm() / (norm_a * vnorm);
            out.residuals[static_cast<std::size_t>(i)] = r;
            out.max_residual = std::max(out.max_residual, r);
        }
        if (!(out.max_residual <= opts.residual_tol)) {
            std::ostringstream msg;
            msg << "eigensolve: residual " << out.max_residual << " exceeds " << opts.residual_tol << " ("
                << op.provenance.description << ", K = " << op.modes_K << ")";
            throw NumericalError(msg.str());
        }
    }
    return out;
}

std::size_t SpectrumResult::trusted_count() const {
    return static_cast<std::size_t>(std::count(trusted.begin(), trusted.end(), true));
}

std::vector<cplx> SpectrumResult::trusted_eigenvalues() const {
    std::vector<cplx> out;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
        if (trusted[i]) out.push_back(eigenvalues[i]);
    return out;
}

SpectrumResult SpectrumResult::exact(std::vector<cplx> eigenvalues, double radius) {
    SpectrumResult out;
    out.eigenvalues = std::move(eigenvalues);
    out.radius_max = radius;
    out.trusted.resize(out.eigenvalues.size());
    for (std::size_t i = 0; i < out.eigenvalues.size(); ++i) out.trusted[i] = std::abs(out.eigenvalues[i]) <= radius;
    return out;
}

SpectrumResult filter_trusted(const RawSpectrum& low, const RawSpectrum& high, double radius_max,
                              bool enforce_window) {
    if (low.provenance != high.provenance)
        throw ConfigError("filter_trusted: resolutions come from different operators (" + low.provenance + " vs " +
                          high.provenance + ")");
    if (enforce_window && radius_max > low.window)
        throw HypothesisError("filter_trusted: radius " + std::to_string(radius_max) +
                              " exceeds the trusted window " + std::to_string(low.window));
    SpectrumResult out;
    out.eigenvalues = low.eigenvalues;
    out.residuals = low.residuals;
    out.trusted.assign(low.eigenvalues.size(), false);
    out.modes_low = low.modes_K;
    out.modes_high = high.modes_K;
    out.radius_max = radius_max;
    out.max_residual = low.max_residual;
    out.provenance = low.provenance;

    const auto& lo = low.eigenvalues;
    const auto& hi = high.eigenvalues;
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (std::abs(lo[i]) <= radius_max) inside.push_back(i);

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i : inside) {
        const double tau = match_tolerance(lo[i]);
        std::size_t n_low = 0, n_high = 0;
        for (const cplx& z : lo)
            if (std::abs(z - lo[i]) <= tau) ++n_low;
        std::vector<std::pair<double, std::size_t>> near;
        for (std::size_t j = 0; j < hi.size(); ++j) {
            const double d = std::abs(hi[j] - lo[i]);
            if (d <= tau) near.emplace_back(d, j);
        }
        n_high = near.size();
        if (n_high > n_low) {
            ++out.ambiguous;
            continue;
        }
        for (const auto& [d, j] : near) pairs.emplace_back(d, i, j);
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> used(hi.size(), false);
    for (const auto& [d, i, j] : pairs) {
        if (out.trusted[i] || used[j]) continue;
        out.trusted[i] = true;
        used[j] = true;
    }
    std::size_t matched = 0;
    for (std::size_t i : inside) matched += out.trusted[i] ? 1 : 0;
    out.untrusted_inside = inside.size() - matched;
    return out;
}

SectorCount count_in_sector(const SpectrumResult& spectrum, const SectorSpec& sector) {
    sector.validate();
    const double reach = sector.r2 * sector.max_g();
    if (reach > spectrum.radius_max * (1.0 + 1e-12))
        throw HypothesisError("count_in_sector: sector reaches radius " + std::to_string(reach) +
                              " beyond the trusted radius " + std::to_string(spectrum.radius_max));
    SectorCount out;
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
        const cplx z = spectrum.eigenvalues[i];
        if (!sector_membership(z, sector)) continue;
        if (!spectrum.trusted[i]) {
            ++out.untrusted_inside;
            continue;
        }
        ++out.count;
        if (distance_to_boundary(z, sector) <= kGrazingDistance) ++out.grazing;
    }
    return out;
}

std::string spectrum_csv(const SpectrumResult& spectrum) {
    std::ostringstream out;
    out.precision(17);
    out << "re,im,trusted,residual\n";
    for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
        out << spectrum.eigenvalues[i].real() << ',' << spectrum.eigenvalues[i].imag() << ','
            << (spectrum.trusted[i] ? 1 : 0) << ',';
        if (i < spectrum.residuals.size()) out << spectrum.residuals[i];
        out << '\n';
    }
    return out.str();
}

}  // namespace weyl
