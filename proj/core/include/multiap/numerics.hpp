#pragma once

#include "multiap/numerics/linalg.hpp"
#include "multiap/numerics/quadrature.hpp"
#include "multiap/numerics/rng.hpp"
#include "multiap/numerics/special.hpp"
