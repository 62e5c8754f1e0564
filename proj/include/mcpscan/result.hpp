#pragma once

#include <optional>
#include <string>
#include <utility>

namespace mcpscan {

/// Error carried by Result<T>. `code` is a short machine-readable tag
/// (e.g. "timeout", "missing-tool"), `message` is for humans.
struct Error {
    std::string code;
    std::string message;
};

template <typename T>
class Result {
public:
    Result(T value) : value_(std::move(value)) {}
    Result(Error error) : error_(std::move(error)) {}

    static Result failure(std::string code, std::string message) {
        return Result(Error{std::move(code), std::move(message)});
    }

    bool ok() const { return value_.has_value(); }
    explicit operator bool() const { return ok(); }

    T& value() & { return *value_; }
    const T& value() const& { return *value_; }
    T&& value() && { return std::move(*value_); }

    const Error& error() const { return *error_; }

    T value_or(T fallback) const {
        return ok() ? *value_ : std::move(fallback);
    }

private:
    std::optional<T> value_;
    std::optional<Error> error_;
};

} // namespace mcpscan
