#pragma once

#include "tamed_ac/error.hpp"
#include "tamed_ac/spectral.hpp"
#include "tamed_ac/drift.hpp"
#include "tamed_ac/philox.hpp"
#include "tamed_ac/noise.hpp"
#include "tamed_ac/scheme.hpp"
#include "tamed_ac/ensemble.hpp"
#include "tamed_ac/analysis.hpp"
#include "tamed_ac/property_suite.hpp"
