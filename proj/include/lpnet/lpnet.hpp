#pragma once

// Umbrella header: the whole library in dependency order.

#include "lpnet/core.hpp"
#include "lpnet/rng.hpp"
#include "lpnet/tensor.hpp"
#include "lpnet/activations.hpp"
#include "lpnet/layers.hpp"
#include "lpnet/network.hpp"
#include "lpnet/optimizer.hpp"
#include "lpnet/dct.hpp"
#include "lpnet/corruptions.hpp"
#include "lpnet/datasets.hpp"
#include "lpnet/synth.hpp"
#include "lpnet/metrics.hpp"
#include "lpnet/svg.hpp"
#include "lpnet/decision_map.hpp"
#include "lpnet/nets.hpp"
#include "lpnet/checkpoint.hpp"
#include "lpnet/config.hpp"
#include "lpnet/csv.hpp"
#include "lpnet/trainer.hpp"
#include "lpnet/plots.hpp"
