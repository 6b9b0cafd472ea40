#pragma once

// Umbrella header. The acceptance battery (validation.hpp) also needs Boost
// and is included separately.

#include "smilekernel/geometry.hpp"
#include "smilekernel/io/csv.hpp"
#include "smilekernel/kernel.hpp"
#include "smilekernel/model.hpp"
#include "smilekernel/pricing.hpp"
#include "smilekernel/quadrature.hpp"
#include "smilekernel/specfun.hpp"
#include "smilekernel/spectral.hpp"
#include "smilekernel/tridiagonal.hpp"
