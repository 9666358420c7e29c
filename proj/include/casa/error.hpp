#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace casa {

enum class ErrorCode {
    invalid_input,
    empty_prefix,
    dimension,
    unsupported_intent,
    invalid_horizon,
    invalid_prior,
    invalid_beta,
    incomplete_input,
    invalid_threshold,
    invalid_arity,
    invalid_alpha,
    invalid_state,
    invalid_config,
    duplicate_id,
    unknown_id,
    parse,
    busy,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI, the service) can map it onto exit codes or wire errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace casa
