#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lolguard {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedBinaryError : public Error {
public:
    explicit UnsupportedBinaryError(const std::string& name)
        : Error("unsupported binary: " + name), binary_(name) {}
    const std::string& binary() const noexcept { return binary_; }

private:
    std::string binary_;
};

class ModelMissingError : public Error {
public:
    explicit ModelMissingError(const std::string& name)
        : Error("no trained model for binary: " + name) {}
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed artifact file (vocabulary, model, whitelist).
class FormatError : public Error {
public:
    using Error::Error;
};

// Malformed dataset line; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class EmptyTrainingError : public Error {
public:
    using Error::Error;
};

class EmptyScoresError : public Error {
public:
    using Error::Error;
};

class PositionOutOfRangeError : public Error {
public:
    using Error::Error;
};

class TooFewSamplesError : public Error {
public:
    using Error::Error;
};

class LengthMismatchError : public Error {
public:
    using Error::Error;
};

} // namespace lolguard
