#pragma once

#include <stdexcept>

namespace grain {

// Base class for all toolkit errors so callers can catch them as one family.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The average confusion ratio is undefined for this matrix: there is no
// intra-coarse confusion to normalize by.
struct DegenerateConfusion : Error {
  using Error::Error;
};

// The hierarchy cannot support the requested pair statistics, e.g. every
// coarse class has a single fine class (no intra-coarse pairs) or there is
// only one coarse class (no inter-coarse pairs).
struct StructureError : Error {
  using Error::Error;
};

}  // namespace grain
