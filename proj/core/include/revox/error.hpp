#pragma once

#include <stdexcept>
#include <string>

namespace revox {

/// Input bytes or text that cannot be decoded into the expected structure.
class MalformedInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (e.g. count above the voxel cap).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid configuration values (sizes, ranges, caps, probabilities).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace revox
