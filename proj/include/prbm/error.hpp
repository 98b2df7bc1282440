#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prbm {

enum class ErrorKind {
    InvalidParam,
    DegenerateGeometry,
    MeshTooCoarse,
    NumericOverflow,
    SlowConvergence,
    TruncationTooCoarse,
    DiagonalSingularity,
    MissingCellImpedance,
    SingularSystem,
    SolveFailure,
    EigenFailure,
    PerimeterTooSmall,
    CensoredFractionExceeded,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Domain error raised by every module. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace prbm
