#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weyl/symbol.hpp"
#include "weyl/trig_poly.hpp"

namespace weyl {

struct OperatorProvenance {
    std::string description;   // symbol and potential identity
    int order_m = 2;
    int bandwidth = 0;         // max |j - k| with a nonzero entry
    bool has_potential = false;
    bool symmetrized = false;
    /// Coefficients c_alpha of a constant-coefficient operator without a
    /// potential (its exact symbol k -> sum c_alpha k^alpha); empty otherwise.
    std::vector<cplx> constant_symbol;
};

/// Fourier-Galerkin matrix on modes -K..K in the basis e^{ikx}/sqrt(2pi).
/// Row/column index i corresponds to mode i - K.
struct DiscretizedOperator {
    int modes_K = 0;
    Eigen::MatrixXcd matrix;
    OperatorProvenance provenance;

    int dimension() const { return 2 * modes_K + 1; }
};

/// Entry (j, k) = sum_alpha a_alpha^(j - k) k^alpha (+ q^(j - k)).
/// Throws ConfigError if K is below the bandwidth of the symbol coefficients.
DiscretizedOperator assemble_operator(const SymbolModel& model, int modes_K);
DiscretizedOperator assemble_operator(const SymbolModel& model, const TrigPoly& potential, int modes_K,
                                      const std::string& potential_tag = "potential");

/// Adds the multiplication operator by `potential` to an assembled operator.
DiscretizedOperator add_potential(const DiscretizedOperator& op, const TrigPoly& potential,
                                  const std::string& potential_tag = "potential");

/// 1/2 (A + Gamma A^* Gamma) with (Gamma u)_k = conj(u_{-k}); entrywise
/// A(j, k) -> (A(j, k) + A(-k, -j)) / 2.
DiscretizedOperator symmetrize(const DiscretizedOperator& op);

/// Matrix of Gamma A Gamma: entry (j, k) = conj A(-j, -k).
Eigen::MatrixXcd conj_flip(const Eigen::MatrixXcd& a);

/// max over trials of |(Au|v) - (u|Gamma A Gamma v)| / (|u| |v| |A|_F) for
/// Gaussian u, v.
double adjoint_symmetry_test(const DiscretizedOperator& op, int trials, std::uint64_t seed);

/// Exact trusted window of a constant-coefficient operator:
/// min |sum c_alpha k^alpha| over integers |k| > K.
double exact_window(const std::vector<cplx>& symbol, int modes_K);

/// Trusted radius Lambda(K): exact for constant coefficients without a
/// potential, (K/4)^m otherwise.
double trusted_window(const OperatorProvenance& prov, int modes_K);
double trusted_window(const DiscretizedOperator& op);

/// Smallest K >= bandwidth with trusted_window(prov, K) >= radius.
int required_modes(const OperatorProvenance& prov, double radius);

/// Provenance the assembler would attach, without building the matrix.
OperatorProvenance describe_operator(const SymbolModel& model, bool has_potential, bool symmetrized,
                                     int potential_degree = 0, const std::string& potential_tag = "potential");

/// Debug export: JSON header line then "row,col,re,im" for nonzero entries.
std::string matrix_csv(const DiscretizedOperator& op);

}  // namespace weyl
