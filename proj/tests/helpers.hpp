#pragma once

#include <cmath>
#include <vector>

#include "weyl/symbol.hpp"

namespace weyl::test {

// p = (1 + a i cos x) xi^2
inline SymbolModel cos_model(double a = 0.5) {
    const std::vector<cplx> c{1.0, cplx{0.0, a}};
    return SymbolModel::create(2, {{2, TrigPoly::from_cos_sin(c, {})}});
}

// p = c xi^2 for a constant c
inline SymbolModel constant_model(cplx c) {
    return SymbolModel::create(2, {{2, TrigPoly::constant(c)}});
}

inline SymbolModel laplacian() { return constant_model(1.0); }

}  // namespace weyl::test
