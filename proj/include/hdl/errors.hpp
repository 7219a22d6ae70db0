#pragma once

#include <stdexcept>
#include <string>

namespace hdl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct DepthError : Error { using Error::Error; };
struct ConvergenceError : Error { using Error::Error; };
struct BracketError : Error { using Error::Error; };
struct MissingDependencyError : Error { using Error::Error; };
struct SupportError : Error { using Error::Error; };
struct ContractionError : Error { using Error::Error; };
struct DivergenceError : Error { using Error::Error; };
struct GridError : Error { using Error::Error; };
struct InversionError : Error { using Error::Error; };

} // namespace hdl
