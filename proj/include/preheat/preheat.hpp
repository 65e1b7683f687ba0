#pragma once

// Core library. config.hpp and serialize.hpp pull in toml++ and nlohmann-json
// and are included separately.
#include "preheat/accounting.hpp"
#include "preheat/cycle.hpp"
#include "preheat/cycle_io.hpp"
#include "preheat/errors.hpp"
#include "preheat/heuristic.hpp"
#include "preheat/interp.hpp"
#include "preheat/model.hpp"
#include "preheat/oracle.hpp"
#include "preheat/params.hpp"
#include "preheat/trajectory.hpp"
#include "preheat/version.hpp"
