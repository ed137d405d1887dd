#pragma once

#include "evosim/analytics.hpp"
#include "evosim/config.hpp"
#include "evosim/coupled_suite.hpp"
#include "evosim/coupling.hpp"
#include "evosim/degree_distribution.hpp"
#include "evosim/engine_dynamic.hpp"
#include "evosim/engine_static.hpp"
#include "evosim/graph.hpp"
#include "evosim/indexed_set.hpp"
#include "evosim/oracles.hpp"
#include "evosim/outbreak.hpp"
#include "evosim/rng.hpp"
#include "evosim/report.hpp"
#include "evosim/scan.hpp"
#include "evosim/verify.hpp"
