#pragma once

#include "peepopt/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace peepopt {

/// Hilbert-Schmidt process distance 1 - |Tr(U^dagger V)| / d. Invariant under
/// global phase, symmetric, and in [0, 1] for unitary arguments.
[[nodiscard]] inline auto hs_distance(UnitaryMatrix const& u, UnitaryMatrix const& v) -> double
{
    if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols()) {
        throw DimensionError{"hs_distance: " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) + " vs "
                             + std::to_string(v.rows()) + "x" + std::to_string(v.cols())};
    }
    // Tr(U^dagger V) = sum_ij conj(U_ij) V_ij
    complex_t const tr = (u.conjugate().cwiseProduct(v)).sum();
    double const d = static_cast<double>(u.rows());
    return std::clamp(1.0 - std::abs(tr) / d, 0.0, 1.0);
}

} // namespace peepopt
