#pragma once

// Umbrella header for the whole library.

#include "qarsta/bench.hpp"
#include "qarsta/cache.hpp"
#include "qarsta/diagnostics.hpp"
#include "qarsta/direction_matrix.hpp"
#include "qarsta/errors.hpp"
#include "qarsta/geometry.hpp"
#include "qarsta/io.hpp"
#include "qarsta/linalg.hpp"
#include "qarsta/models.hpp"
#include "qarsta/problems.hpp"
#include "qarsta/profiles.hpp"
#include "qarsta/simplex_calculus.hpp"
#include "qarsta/solver.hpp"
#include "qarsta/trsolver.hpp"
