#pragma once

// Umbrella header for the whole toolkit.

#include "quantbench/advisory.hpp"
#include "quantbench/cli.hpp"
#include "quantbench/config.hpp"
#include "quantbench/data.hpp"
#include "quantbench/date.hpp"
#include "quantbench/errors.hpp"
#include "quantbench/eval.hpp"
#include "quantbench/fundamentals.hpp"
#include "quantbench/matrix.hpp"
#include "quantbench/model.hpp"
#include "quantbench/model_io.hpp"
#include "quantbench/preprocess.hpp"
#include "quantbench/rng.hpp"
#include "quantbench/sentiment.hpp"
#include "quantbench/train.hpp"
