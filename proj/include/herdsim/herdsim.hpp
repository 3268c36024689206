#pragma once

#include "herdsim/agents.hpp"
#include "herdsim/beliefs.hpp"
#include "herdsim/cluster.hpp"
#include "herdsim/config.hpp"
#include "herdsim/controllers.hpp"
#include "herdsim/geometry.hpp"
#include "herdsim/netmatch.hpp"
#include "herdsim/pathfind.hpp"
#include "herdsim/rng.hpp"
#include "herdsim/runner.hpp"
#include "herdsim/world.hpp"
