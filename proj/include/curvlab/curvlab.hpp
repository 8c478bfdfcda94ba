#pragma once

#include "curvlab/branching.hpp"
#include "curvlab/coefficients.hpp"
#include "curvlab/curvature.hpp"
#include "curvlab/geometry_scan.hpp"
#include "curvlab/quadrature.hpp"
#include "curvlab/report.hpp"
#include "curvlab/rng.hpp"
#include "curvlab/space1d.hpp"
#include "curvlab/transport1d.hpp"
#include "curvlab/tripod.hpp"
#include "curvlab/weight_fn.hpp"
