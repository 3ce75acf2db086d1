#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "weyl/discretization.hpp"
#include "weyl/geometry.hpp"

namespace weyl {

/// Eigenvalues of one Galerkin matrix, in solver order, with list
/// multiplicity standing in for algebraic multiplicity.
struct RawSpectrum {
    int modes_K = 0;
    std::vector<cplx> eigenvalues;
    std::vector<double> residuals;  // per eigenvalue; empty when not certified
    double max_residual = 0.0;
    double window = 0.0;            // trusted_window of the operator
    std::string provenance;
};

struct EigensolveOptions {
    bool certify = true;            // compute eigenvectors and residuals
    double residual_tol = 1e-10;
};

/// All eigenvalues via LAPACK zgeev. When certifying, every normalized
/// residual |Av - lambda v| / (|A|_F |v|) must be <= residual_tol, otherwise
/// NumericalError naming the operator provenance.
RawSpectrum eigensolve(const DiscretizedOperator& op, const EigensolveOptions& opts = {});

/// Relative matching tolerance 1e-6 (1 + |lambda|).
inline double match_tolerance(cplx lambda) { return 1e-6 * (1.0 + std::abs(lambda)); }

struct SpectrumResult {
    std::vector<cplx> eigenvalues;  // the low-resolution list
    std::vector<bool> trusted;
    std::vector<double> residuals;
    int modes_low = 0;
    int modes_high = 0;
    double radius_max = 0.0;        // eigenvalues beyond this are never trusted
    std::size_t untrusted_inside = 0;  // unmatched with |lambda| <= radius_max
    std::size_t ambiguous = 0;         // excluded because a cluster changed size
    double max_residual = 0.0;
    std::string provenance;

    std::size_t trusted_count() const;
    std::vector<cplx> trusted_eigenvalues() const;

    /// Every listed eigenvalue within `radius` trusted (exact spectra in tests).
    static SpectrumResult exact(std::vector<cplx> eigenvalues, double radius);
};

/// Greedy nearest-neighbour matching of the K list against the 2K list for
/// eigenvalues with |lambda| <= radius_max. A low eigenvalue whose
/// tolerance disk holds more high-resolution eigenvalues than
/// low-resolution ones is ambiguous and left untrusted. With
/// `enforce_window`, radius_max > low.window is a HypothesisError.
SpectrumResult filter_trusted(const RawSpectrum& low, const RawSpectrum& high, double radius_max,
                              bool enforce_window = true);

struct SectorCount {
    std::size_t count = 0;
    std::size_t grazing = 0;           // counted eigenvalues within 1e-9 of the boundary
    std::size_t untrusted_inside = 0;  // unmatched eigenvalues that fall in the sector
};

/// Trusted eigenvalues inside the sector, by list multiplicity. A sector
/// reaching past the trusted radius is a HypothesisError.
SectorCount count_in_sector(const SpectrumResult& spectrum, const SectorSpec& sector);

inline constexpr double kGrazingDistance = 1e-9;

/// CSV "re,im,trusted,residual".
std::string spectrum_csv(const SpectrumResult& spectrum);

}  // namespace weyl
