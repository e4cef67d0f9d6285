#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nehari {

/// Failure classes surfaced by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
    InvalidArgument,
    Config,
    EmptyDomain,
    ZeroField,
    NoRoot,
    NoRoots,
    NonPositiveConcaveTerm,
    ProjectionLost,
    NoNminusProjection,
    NoNplusProjection,
    MaxIterations,
    LineSearchFailed,
    EnergyAboveThreshold,
    NonnegativityFailed,
    NoAdmissibleSample,
    NoU2Point,
    BubbleOutsideDomain,
    Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace nehari
