#pragma once

#include <cstdlib>

namespace tensorconc {

/// x^p for small integer p by repeated squaring.
inline double pow_int(double x, int p) {
  double r = 1.0;
  double b = x;
  unsigned e = static_cast<unsigned>(p < 0 ? 0 : p);
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

}  // namespace tensorconc
