#pragma once

#include "frilift/bench.hpp"
#include "frilift/fri_signals.hpp"
#include "frilift/numeric.hpp"
#include "frilift/serialize.hpp"
#include "frilift/solvers.hpp"
#include "frilift/spectral_estimation.hpp"
#include "frilift/structured_matrix.hpp"
#include "frilift/weighting.hpp"
