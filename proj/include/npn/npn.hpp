#pragma once

#include "npn/error.hpp"
#include "npn/matrix.hpp"
#include "npn/special.hpp"
#include "npn/rank_stats.hpp"
#include "npn/estimators.hpp"
#include "npn/simulation.hpp"
#include "npn/csv.hpp"
