#pragma once

#include <cmath>

namespace grain {

// floor/ceil with a small slack absorbing the binary representation error of
// decimal fractions, so that e.g. a 0.6 share of 5 items floors to exactly 3
// even though 0.6 * 5 is slightly below 3 in double precision. The slack is
// far smaller than the 1/n spacing of attainable count ratios for any
// realistic n, so it never changes an exact-in-decimal answer.
inline long long floor_slack(double x) {
  return static_cast<long long>(std::floor(x + 1e-9));
}

inline long long ceil_slack(double x) {
  return static_cast<long long>(std::ceil(x - 1e-9));
}

}  // namespace grain
