#pragma once

// Umbrella header for the rcbo library: simulation of a quantised-sin^2
// photonic reservoir computer and hyper-parameter search over its four gains
// (feedback, input, interconnection gain/density) by Gaussian-process
// Bayesian optimisation or exhaustive grid sweep.

#include "rcbo/acquisition.hpp"
#include "rcbo/campaign.hpp"
#include "rcbo/cli.hpp"
#include "rcbo/config.hpp"
#include "rcbo/gp.hpp"
#include "rcbo/hyperspace.hpp"
#include "rcbo/log_io.hpp"
#include "rcbo/matrix_io.hpp"
#include "rcbo/readout.hpp"
#include "rcbo/reservoir.hpp"
#include "rcbo/rng.hpp"
#include "rcbo/tasks.hpp"
