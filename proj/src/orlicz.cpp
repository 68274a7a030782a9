#include "tensorconc/orlicz.hpp"

#include <cmath>
#include <stdexcept>

#include "tensorconc/errors.hpp"

namespace tensorconc {

double orlicz_norm(const std::function<double(double)>& exp_moment, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("orlicz_norm: alpha must lie in (0, 2]");

  // E exp(|X|^a / c^a) is non-increasing in c, so one sign flip brackets
  // the norm. Degenerate X = 0 gives expectation 1 everywhere.
  auto below = [&](double c) {
    const double v = exp_moment(c);
    return std::isfinite(v) && v <= 2.0;
  };

  double hi = 1e-12;
  if (!below(hi)) {
    int expansions = 0;
    do {
      hi *= 2.0;
      if (++expansions > 320) throw moment_error("orlicz_norm: variable not in Orlicz space");
    } while (!below(hi));
  } else {
    return 0.0;  // essentially zero variable
  }

  double lo = hi / 2.0;
  while ((hi - lo) > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (below(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace tensorconc
