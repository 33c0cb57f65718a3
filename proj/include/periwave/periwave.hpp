#pragma once

// Umbrella header: the full public surface.

#include "periwave/apply.hpp"
#include "periwave/cell.hpp"
#include "periwave/errors.hpp"
#include "periwave/kernels.hpp"
#include "periwave/nufft.hpp"
#include "periwave/oracle.hpp"
#include "periwave/periodize.hpp"
#include "periwave/quadrature.hpp"
#include "periwave/util.hpp"
