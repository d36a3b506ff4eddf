#pragma once

// Block-bootstrap variance estimation for stationary time series: the
// stationary, nonoverlapping, moving, circular, and tapered block schemes,
// their lag-weight and frequency-domain representations, the matching
// limit-theory formulas, and a reproducible Monte Carlo harness.

#include "blockboot/ar1.hpp"
#include "blockboot/asymptotics.hpp"
#include "blockboot/block.hpp"
#include "blockboot/errors.hpp"
#include "blockboot/experiment.hpp"
#include "blockboot/quadrature.hpp"
#include "blockboot/rng.hpp"
#include "blockboot/series.hpp"
#include "blockboot/weights.hpp"

namespace blockboot {

inline constexpr const char* version = "0.1.0";

}  // namespace blockboot
