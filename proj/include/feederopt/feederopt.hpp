#pragma once

// Umbrella header for the radial feeder battery-dispatch toolkit.

#include "feederopt/battery.hpp"
#include "feederopt/config.hpp"
#include "feederopt/csv.hpp"
#include "feederopt/errors.hpp"
#include "feederopt/ieee33.hpp"
#include "feederopt/load_flow.hpp"
#include "feederopt/mix.hpp"
#include "feederopt/network.hpp"
#include "feederopt/objective.hpp"
#include "feederopt/paper_reference.hpp"
#include "feederopt/profiles.hpp"
#include "feederopt/pso.hpp"
#include "feederopt/report.hpp"
#include "feederopt/scenario.hpp"
