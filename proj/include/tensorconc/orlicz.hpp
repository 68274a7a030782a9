#pragma once

#include <functional>

namespace tensorconc {

/// Smallest c > 0 with E exp(|X|^alpha / c^alpha) <= 2, computed by
/// bisection on c. `exp_moment` must return E exp(|X|^alpha / c^alpha) for
/// a given c (exactly or by quadrature); it may return +infinity. The
/// bracket starts near zero and expands geometrically until the condition
/// flips; relative tolerance 1e-10.
///
/// Throws moment_error if the expectation stays above 2 for every bracket
/// the search can reach (the variable is not in the Orlicz space).
double orlicz_norm(const std::function<double(double)>& exp_moment, double alpha);

}  // namespace tensorconc
