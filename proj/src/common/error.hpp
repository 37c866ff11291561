#pragma once

#include <stdexcept>
#include <string>

namespace newsrank {

// Bad user input: unparseable files, shape mismatches, invalid arguments.
// Maps to exit code 2 at the CLI.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime failure during training (divergence, internal state errors).
// Maps to exit code 3 at the CLI.
class TrainError : public std::runtime_error {
public:
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace newsrank
