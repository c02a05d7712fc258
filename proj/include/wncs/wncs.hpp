#pragma once

#include "wncs/control.hpp"
#include "wncs/csv.hpp"
#include "wncs/delay_approx.hpp"
#include "wncs/error.hpp"
#include "wncs/estimator.hpp"
#include "wncs/harness.hpp"
#include "wncs/lti.hpp"
#include "wncs/netsim.hpp"
#include "wncs/polynomial.hpp"
#include "wncs/predictor.hpp"
#include "wncs/scenario_io.hpp"
#include "wncs/stability.hpp"
