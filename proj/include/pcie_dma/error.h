#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcie_dma {

enum class ErrorCode {
  // tlp_codec
  kInvalidLength,
  kMisalignedAddress,
  kStructuralViolation,
  kInvalidField,
  kTruncatedPacket,
  kUnknownTypeCode,
  kPayloadLengthMismatch,
  // bar0_regfile
  kUnalignedAccess,
  kOutOfRange,
  // dma_endpoint
  kProtocolViolation,
  kDescriptorInvalid,
  kMsiAlreadyPending,
  // host_driver
  kRangeOutsideBuffer,
  kBadDescriptor,
  kAddressUnmapped,
  kUnexpectedTlpType,
  kSpuriousInterrupt,
  // link_sim
  kInvalidConfig,
  kHalted,
  kDeadlockDetected,
  // perf_model
  kZeroCounter,
  // experiments
  kIndivisibleDataSize,
  kPayloadOutOfRange,
  kIoFailure,
};

std::string_view error_name(ErrorCode code);

class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pcie_dma
