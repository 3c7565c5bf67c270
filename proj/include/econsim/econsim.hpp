#pragma once

#include "econsim/banks.hpp"
#include "econsim/bridge.hpp"
#include "econsim/config.hpp"
#include "econsim/csv.hpp"
#include "econsim/env.hpp"
#include "econsim/firms.hpp"
#include "econsim/governments.hpp"
#include "econsim/households.hpp"
#include "econsim/metrics.hpp"
#include "econsim/parallel.hpp"
#include "econsim/policies.hpp"
#include "econsim/presets.hpp"
#include "econsim/rng.hpp"
#include "econsim/runner.hpp"
#include "econsim/scenario.hpp"
#include "econsim/state.hpp"
#include "econsim/taxes.hpp"
#include "econsim/trajectory.hpp"
#include "econsim/types.hpp"
