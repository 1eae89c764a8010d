#pragma once

#include "sconv/convolution.hpp"
#include "sconv/harness.hpp"
#include "sconv/hermite_space.hpp"
#include "sconv/integrand.hpp"
#include "sconv/noise.hpp"
#include "sconv/parallel.hpp"
#include "sconv/rng.hpp"
#include "sconv/scenario.hpp"
#include "sconv/see.hpp"
#include "sconv/semigroup.hpp"
#include "sconv/stochastic_integral.hpp"
#include "sconv/version.hpp"
