#pragma once

#include "essmc/chatter.hpp"
#include "essmc/controllers.hpp"
#include "essmc/convergence.hpp"
#include "essmc/core.hpp"
#include "essmc/disturbance.hpp"
#include "essmc/io.hpp"
#include "essmc/plant.hpp"
#include "essmc/scenarios.hpp"
#include "essmc/sim.hpp"
#include "essmc/surface.hpp"
#include "essmc/tuner.hpp"
