#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hummit {

/// Domain error with a stable machine-readable kind ("MalformedContainer",
/// "LengthMismatch", ...) plus a human message. The CLI maps any Error to
/// exit code 2 and prints `kind: message`.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void raise(std::string kind, const std::string& message) {
    throw Error(std::move(kind), message);
}

} // namespace hummit
