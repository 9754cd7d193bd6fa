#pragma once

#include "fracemb/error.hpp"
#include "fracemb/special_functions.hpp"
#include "fracemb/grid.hpp"
#include "fracemb/fracops.hpp"
#include "fracemb/random.hpp"
#include "fracemb/parallel.hpp"
#include "fracemb/stats.hpp"
#include "fracemb/stochastic_time.hpp"
#include "fracemb/systems.hpp"
#include "fracemb/residual.hpp"
#include "fracemb/dynamics.hpp"
#include "fracemb/variational.hpp"
#include "fracemb/bridge.hpp"
#include "fracemb/io.hpp"
