#pragma once

#include <stdexcept>
#include <string>

namespace rvt {

// Base for all library errors. CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad flags, malformed config, unknown categories, missing files.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed input rows, schema violations, empty corpora.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// HTTP failures that survived all retries.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error(msg) {}
};

// Endpoint answered but the payload could not be interpreted.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& msg) : Error(msg) {}
};

// Replay store has no entry for a requested (prompt, repetition).
class FixtureMissError : public Error {
public:
    explicit FixtureMissError(const std::string& msg) : Error(msg) {}
};

// Too few parseable yes/no answers to form a probability.
class LowValidityError : public Error {
public:
    LowValidityError(const std::string& msg, int valid, int total)
        : Error(msg), valid_count(valid), total_count(total) {}
    int valid_count;
    int total_count;
};

} // namespace rvt
