#pragma once

// Umbrella header.

#include "hetnids/adapt/mmd.hpp"
#include "hetnids/cli/config.hpp"
#include "hetnids/data/combinations.hpp"
#include "hetnids/data/csv.hpp"
#include "hetnids/data/persist.hpp"
#include "hetnids/data/pipeline.hpp"
#include "hetnids/data/synth.hpp"
#include "hetnids/data/table.hpp"
#include "hetnids/eval/experiment.hpp"
#include "hetnids/eval/metrics.hpp"
#include "hetnids/eval/report.hpp"
#include "hetnids/matrix.hpp"
#include "hetnids/model/config.hpp"
#include "hetnids/model/hetero.hpp"
#include "hetnids/model/loss.hpp"
#include "hetnids/model/train.hpp"
#include "hetnids/nn/adam.hpp"
#include "hetnids/nn/checkpoint.hpp"
#include "hetnids/nn/layers.hpp"
#include "hetnids/rng.hpp"
