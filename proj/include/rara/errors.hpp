#pragma once

#include <stdexcept>
#include <string>

namespace rara {

// Malformed or incomplete scene file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scene with no primitives where one is required.
class EmptySceneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid generator or operation parameter.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Degenerate geometry (singular transform).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent render or run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace rara
