#pragma once

#include "radsim/building.hpp"
#include "radsim/building_io.hpp"
#include "radsim/errors.hpp"
#include "radsim/field.hpp"
#include "radsim/iterative_solver.hpp"
#include "radsim/mass.hpp"
#include "radsim/radiation.hpp"
#include "radsim/report.hpp"
#include "radsim/simulation.hpp"
#include "radsim/solar.hpp"
#include "radsim/tensor_solver.hpp"
#include "radsim/weather.hpp"
