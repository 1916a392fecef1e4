#pragma once

#include "nmq/core_quantum.hpp"
#include "nmq/counter_rng.hpp"
#include "nmq/noise_engine.hpp"
#include "nmq/dephasing.hpp"
#include "nmq/measures.hpp"
#include "nmq/config.hpp"
#include "nmq/experiments.hpp"
