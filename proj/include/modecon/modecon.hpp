#pragma once

#include "modecon/counterexample.hpp"
#include "modecon/dataset.hpp"
#include "modecon/dropout.hpp"
#include "modecon/error.hpp"
#include "modecon/io.hpp"
#include "modecon/linalg.hpp"
#include "modecon/net.hpp"
#include "modecon/paths.hpp"
#include "modecon/rng.hpp"
#include "modecon/stability.hpp"
#include "modecon/train.hpp"
