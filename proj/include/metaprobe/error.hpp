#pragma once

#include <stdexcept>
#include <string>

namespace metaprobe {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
    config,        // bad config, bad input data, missing credential
    data,          // malformed table / fixture content
    transport,     // network failure after retries, HTTP error
    cassette_miss, // replay lookup failed
    degenerate,    // metric undefined for the given input
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};

struct DataError : Error {
    explicit DataError(const std::string& m) : Error(ErrorKind::data, m) {}
};

struct TransportError : Error {
    explicit TransportError(const std::string& m, bool retryable = true)
        : Error(ErrorKind::transport, m), retryable(retryable) {}
    bool retryable;
};

struct CassetteMiss : Error {
    explicit CassetteMiss(const std::string& m) : Error(ErrorKind::cassette_miss, m) {}
};

struct DegenerateInput : Error {
    explicit DegenerateInput(const std::string& m) : Error(ErrorKind::degenerate, m) {}
};

} // namespace metaprobe
