#include "pcie_dma/error.h"

namespace pcie_dma {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidLength: return "InvalidLength";
    case ErrorCode::kMisalignedAddress: return "MisalignedAddress";
    case ErrorCode::kStructuralViolation: return "StructuralViolation";
    case ErrorCode::kInvalidField: return "InvalidField";
    case ErrorCode::kTruncatedPacket: return "TruncatedPacket";
    case ErrorCode::kUnknownTypeCode: return "UnknownTypeCode";
    case ErrorCode::kPayloadLengthMismatch: return "PayloadLengthMismatch";
    case ErrorCode::kUnalignedAccess: return "UnalignedAccess";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kDescriptorInvalid: return "DescriptorInvalid";
    case ErrorCode::kMsiAlreadyPending: return "MsiAlreadyPending";
    case ErrorCode::kRangeOutsideBuffer: return "RangeOutsideBuffer";
    case ErrorCode::kBadDescriptor: return "BadDescriptor";
    case ErrorCode::kAddressUnmapped: return "AddressUnmapped";
    case ErrorCode::kUnexpectedTlpType: return "UnexpectedTlpType";
    case ErrorCode::kSpuriousInterrupt: return "SpuriousInterrupt";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kHalted: return "Halted";
    case ErrorCode::kDeadlockDetected: return "DeadlockDetected";
    case ErrorCode::kZeroCounter: return "ZeroCounter";
    case ErrorCode::kIndivisibleDataSize: return "IndivisibleDataSize";
    case ErrorCode::kPayloadOutOfRange: return "PayloadOutOfRange";
    case ErrorCode::kIoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace pcie_dma
