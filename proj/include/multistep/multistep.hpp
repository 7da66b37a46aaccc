#pragma once

#include "multistep/errors.hpp"
#include "multistep/nn/mlp.hpp"
#include "multistep/nn/loss.hpp"
#include "multistep/nn/adam.hpp"
#include "multistep/nn/train.hpp"
#include "multistep/nn/serialize.hpp"
#include "multistep/data/time_series.hpp"
#include "multistep/data/normalizer.hpp"
#include "multistep/data/windows.hpp"
#include "multistep/strategies/common.hpp"
#include "multistep/strategies/recursive.hpp"
#include "multistep/strategies/direct.hpp"
#include "multistep/strategies/multi_output.hpp"
#include "multistep/dad/dad.hpp"
#include "multistep/cgan/cgan.hpp"
#include "multistep/eval/metrics.hpp"
#include "multistep/synthetic.hpp"
