#pragma once

#include "tdtarget/errors.hpp"
#include "tdtarget/rng.hpp"
#include "tdtarget/mrp.hpp"
#include "tdtarget/sampling.hpp"
#include "tdtarget/bellman.hpp"
#include "tdtarget/schedule.hpp"
#include "tdtarget/learners.hpp"
#include "tdtarget/stability.hpp"
#include "tdtarget/experiment.hpp"
