#pragma once

#include "sigw/analysis.hpp"
#include "sigw/error.hpp"
#include "sigw/experiments.hpp"
#include "sigw/gaussian.hpp"
#include "sigw/io.hpp"
#include "sigw/linalg.hpp"
#include "sigw/matrix.hpp"
#include "sigw/measures.hpp"
#include "sigw/parallel.hpp"
#include "sigw/random.hpp"
#include "sigw/slicing.hpp"
#include "sigw/stiefel.hpp"
#include "sigw/univariate.hpp"
