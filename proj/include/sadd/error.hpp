#pragma once

#include <stdexcept>
#include <string>

namespace sadd {

/// Failure raised by any pipeline stage. `stage()` names the stage that
/// failed ("load", "impute", "discretize", ...) so orchestration code can
/// report where a run broke without parsing the message.
class Error : public std::runtime_error {
public:
    Error(std::string stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace sadd
