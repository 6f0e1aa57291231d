#pragma once

#include <stdexcept>
#include <string>

namespace citytypo {

// Bad or inconsistent configuration / CLI input. Commands exit with code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Input data violates a contract (missing labels, single-class targets, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Page fetch failure. `retriable` distinguishes transient network trouble
// from permanent conditions such as HTTP 404.
class FetchError : public std::runtime_error {
public:
    FetchError(const std::string& what, bool retriable)
        : std::runtime_error(what), retriable_(retriable) {}
    bool retriable() const { return retriable_; }

private:
    bool retriable_;
};

}  // namespace citytypo
