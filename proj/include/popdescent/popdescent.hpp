#pragma once

// Umbrella header for the whole library.

#include "popdescent/config.hpp"
#include "popdescent/dataset.hpp"
#include "popdescent/engine.hpp"
#include "popdescent/experiment.hpp"
#include "popdescent/fitness.hpp"
#include "popdescent/individual.hpp"
#include "popdescent/mlp.hpp"
#include "popdescent/mutation.hpp"
#include "popdescent/objectives.hpp"
#include "popdescent/optimizers.hpp"
#include "popdescent/report.hpp"
#include "popdescent/rng.hpp"
#include "popdescent/schedules.hpp"
#include "popdescent/search.hpp"
#include "popdescent/training.hpp"
