#pragma once

#include <stdexcept>
#include <string>

namespace govrek {

// Base class for all govrek errors. Subclasses correspond to the
// failure modes surfaced through the public API.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DomainMismatch : public Error {
public:
    explicit DomainMismatch(const std::string& what) : Error("DomainMismatch: " + what) {}
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error("InvalidInput: " + what) {}
};

class MissingContext : public Error {
public:
    explicit MissingContext(const std::string& what) : Error("MissingContext: " + what) {}
};

class DegenerateField : public Error {
public:
    explicit DegenerateField(const std::string& what) : Error("DegenerateField: " + what) {}
};

class LayoutInfeasible : public Error {
public:
    explicit LayoutInfeasible(const std::string& what) : Error("LayoutInfeasible: " + what) {}
};

class EpisodeFinished : public Error {
public:
    explicit EpisodeFinished(const std::string& what) : Error("EpisodeFinished: " + what) {}
};

class Overflow : public Error {
public:
    explicit Overflow(const std::string& what) : Error("Overflow: " + what) {}
};

class CapacityExceeded : public Error {
public:
    explicit CapacityExceeded(const std::string& what) : Error("CapacityExceeded: " + what) {}
};

class InvalidBudget : public Error {
public:
    explicit InvalidBudget(const std::string& what) : Error("InvalidBudget: " + what) {}
};

class BracketExhausted : public Error {
public:
    explicit BracketExhausted(const std::string& what) : Error("BracketExhausted: " + what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("ConfigError: " + what) {}
};

class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& what) : Error("AlignmentError: " + what) {}
};

class MissingRun : public Error {
public:
    explicit MissingRun(const std::string& what) : Error("MissingRun: " + what) {}
};

} // namespace govrek
