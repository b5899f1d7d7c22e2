#pragma once

/// @file lsxfem.hpp
/// @brief Umbrella header.

#include "assembly.hpp"
#include "bench.hpp"
#include "core.hpp"
#include "element.hpp"
#include "enrichment.hpp"
#include "fracture.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "smoothing.hpp"
