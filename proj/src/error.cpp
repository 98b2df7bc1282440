#include "prbm/error.hpp"

namespace prbm {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidParam: return "InvalidParam";
        case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorKind::MeshTooCoarse: return "MeshTooCoarse";
        case ErrorKind::NumericOverflow: return "NumericOverflow";
        case ErrorKind::SlowConvergence: return "SlowConvergence";
        case ErrorKind::TruncationTooCoarse: return "TruncationTooCoarse";
        case ErrorKind::DiagonalSingularity: return "DiagonalSingularity";
        case ErrorKind::MissingCellImpedance: return "MissingCellImpedance";
        case ErrorKind::SingularSystem: return "SingularSystem";
        case ErrorKind::SolveFailure: return "SolveFailure";
        case ErrorKind::EigenFailure: return "EigenFailure";
        case ErrorKind::PerimeterTooSmall: return "PerimeterTooSmall";
        case ErrorKind::CensoredFractionExceeded: return "CensoredFractionExceeded";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace prbm
