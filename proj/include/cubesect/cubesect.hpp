#pragma once

#include "cubesect/core.hpp"
#include "cubesect/specfun.hpp"
#include "cubesect/integrate.hpp"
#include "cubesect/quadrature.hpp"
#include "cubesect/montecarlo.hpp"
#include "cubesect/bounds.hpp"
#include "cubesect/multidim.hpp"
#include "cubesect/report.hpp"
