#pragma once

// Umbrella header for the randghep library.

#include "randghep/types.hpp"
#include "randghep/operators.hpp"
#include "randghep/matrix_market.hpp"
#include "randghep/borth.hpp"
#include "randghep/sketch.hpp"
#include "randghep/ghep.hpp"
#include "randghep/gsvd.hpp"
#include "randghep/error_analysis.hpp"
#include "randghep/kle.hpp"
#include "randghep/io_json.hpp"
