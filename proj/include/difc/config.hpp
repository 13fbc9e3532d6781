#pragma once

#include <string>

#include "difc/control.hpp"
#include "difc/setmem.hpp"

// Plain key-value config. Lines are `key = value`, `#` starts a comment and
// `[section]` headers scope the keys; see README for the schema.

namespace difc::config {

struct ConfigError : ModelError {
    using ModelError::ModelError;
};

struct Settings {
    PlantConfig plant;
    estim::GammaPrior prior{{2.7, 900.0, 0.09}, {3.3, 1100.0, 0.11}};
    control::ControllerConfig controller;
};

Settings defaults();
Settings load(const std::string& path);
Settings parse(const std::string& text);

}  // namespace difc::config
