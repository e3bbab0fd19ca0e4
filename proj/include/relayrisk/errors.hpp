#pragma once

#include <stdexcept>
#include <string>

namespace relayrisk {

/// Malformed case-file syntax. Carries the 1-based line of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A syntactically valid case that breaks a Network invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation called outside its precondition (unknown relay, double removal, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The un-faulted network has no steady-state solution.
class InfeasibleBaseCase : public std::runtime_error {
public:
    InfeasibleBaseCase() : std::runtime_error("base case infeasible") {}
    explicit InfeasibleBaseCase(const std::string& detail)
        : std::runtime_error("base case infeasible: " + detail) {}
};

}  // namespace relayrisk
