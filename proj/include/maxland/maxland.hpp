#pragma once

#include "maxland/analytic.hpp"
#include "maxland/barren.hpp"
#include "maxland/error.hpp"
#include "maxland/experiment.hpp"
#include "maxland/gf2.hpp"
#include "maxland/graph.hpp"
#include "maxland/landscape.hpp"
#include "maxland/optimize.hpp"
#include "maxland/parallel.hpp"
#include "maxland/random.hpp"
#include "maxland/statevector.hpp"
