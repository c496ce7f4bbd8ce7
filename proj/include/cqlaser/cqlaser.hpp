#pragma once

#include "core.hpp"
#include "csv.hpp"
#include "goodcavity.hpp"
#include "lamb.hpp"
#include "moments.hpp"
#include "motion.hpp"
#include "parallel.hpp"
#include "selftest.hpp"
#include "stochsim.hpp"
#include "sweep.hpp"
#include "trajectory.hpp"
