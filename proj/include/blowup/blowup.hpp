#pragma once

// Umbrella header.

#include "blowup/analysis.hpp"
#include "blowup/config.hpp"
#include "blowup/error.hpp"
#include "blowup/experiment.hpp"
#include "blowup/io.hpp"
#include "blowup/model.hpp"
#include "blowup/ode_oracle.hpp"
#include "blowup/potentials.hpp"
#include "blowup/solver.hpp"
#include "blowup/supersolution.hpp"
