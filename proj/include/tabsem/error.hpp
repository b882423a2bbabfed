#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tabsem {

// Base of every error the engine raises on purpose. `code()` is a stable
// identifier that the CLI and HTTP layer pass through verbatim.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }
    virtual const std::vector<std::string>& details() const noexcept { return details_; }

protected:
    Error(std::string code, const std::string& message, std::vector<std::string> details)
        : std::runtime_error(message), code_(std::move(code)), details_(std::move(details)) {}

private:
    std::string code_;
    std::vector<std::string> details_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error("ParseError", "line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EncodingError : public Error {
public:
    explicit EncodingError(const std::string& message) : Error("EncodingError", message) {}
};

class EmptyInputError : public Error {
public:
    explicit EmptyInputError(const std::string& message) : Error("EmptyInputError", message) {}
};

class InsufficientRowsError : public Error {
public:
    explicit InsufficientRowsError(const std::string& message)
        : Error("InsufficientRowsError", message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("ValidationError", message) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& message) : Error("NotFoundError", message) {}
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& message, std::vector<std::string> details = {})
        : Error("IntegrityError", message, std::move(details)) {}
};

class SnapshotError : public Error {
public:
    explicit SnapshotError(const std::string& reason) : Error("SnapshotError", reason) {}
};

// Raised by the structurer when a hierarchy or grouping cannot be applied.
class SpecError : public Error {
public:
    SpecError(const std::string& message, std::vector<std::string> violations)
        : Error("SpecError", message, std::move(violations)) {}
};

class PhaseError : public Error {
public:
    explicit PhaseError(const std::string& message) : Error("PhaseError", message) {}
};

class ReplayError : public Error {
public:
    ReplayError(std::size_t seq, const std::string& message)
        : Error("ReplayError", "seq " + std::to_string(seq) + ": " + message), seq_(seq) {}
    std::size_t seq() const noexcept { return seq_; }

private:
    std::size_t seq_;
};

class FinalizeBlockedError : public Error {
public:
    FinalizeBlockedError(const std::string& message, std::vector<std::string> blockers)
        : Error("FinalizeBlockedError", message, std::move(blockers)) {}
};

class ClassifyError : public Error {
public:
    explicit ClassifyError(const std::string& message) : Error("ClassifyError", message) {}
};

}  // namespace tabsem
