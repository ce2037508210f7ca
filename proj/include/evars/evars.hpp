#pragma once

#include "evars/augment/build.hpp"
#include "evars/bench/sweep.hpp"
#include "evars/cpd/detector.hpp"
#include "evars/features.hpp"
#include "evars/gpr/snapshot.hpp"
#include "evars/gpr/tuning.hpp"
#include "evars/online/runner.hpp"
#include "evars/prepare.hpp"
#include "evars/simulate.hpp"
#include "evars/timeseries.hpp"
