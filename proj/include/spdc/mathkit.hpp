#pragma once

#include "spdc/error.hpp"
#include "spdc/math/cubature.hpp"
#include "spdc/math/monte_carlo.hpp"
#include "spdc/math/region.hpp"
#include "spdc/math/special.hpp"
