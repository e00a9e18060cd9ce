#pragma once

#include <string>

#include "json.hpp"
#include "tws/measure.hpp"

namespace tws {

using json = nlohmann::json;

/// Parse {"resolution", "cells": [{"k","w"}], "atoms": [{"x","m"}], "signed"}.
/// `where` prefixes error locations (a file name or a config key).
StepAtomicMeasure measure_from_json(const json& j, const std::string& where = "measure");
StepAtomicMeasure load_measure(const std::string& path);

/// Cell form when every segment is a whole number of dyadic cells at the
/// measure's resolution; otherwise a "segments" array [{"a","b","w"}].
json measure_to_json(const StepAtomicMeasure& mu);

}  // namespace tws
