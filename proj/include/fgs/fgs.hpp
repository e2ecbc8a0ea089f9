#pragma once

#include "fgs/covariance.hpp"
#include "fgs/dataset.hpp"
#include "fgs/graph.hpp"
#include "fgs/graph_io.hpp"
#include "fgs/metrics.hpp"
#include "fgs/score.hpp"
#include "fgs/search.hpp"
#include "fgs/simulate.hpp"
