#ifndef LAXSCHED_HPP
#define LAXSCHED_HPP

#include "laxsched/analysis.hpp"
#include "laxsched/capacity.hpp"
#include "laxsched/channel.hpp"
#include "laxsched/core.hpp"
#include "laxsched/engine.hpp"
#include "laxsched/experiment.hpp"
#include "laxsched/lp.hpp"
#include "laxsched/oracle.hpp"
#include "laxsched/policies.hpp"
#include "laxsched/rng.hpp"
#include "laxsched/traffic.hpp"

#endif
