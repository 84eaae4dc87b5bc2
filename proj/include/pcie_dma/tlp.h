#pragma once

// Transaction-layer packets exchanged between the FPGA endpoint and the host.
//
// Only 32-bit addressing is modelled, so every request carries a 3DW header.
// Header DWORDs are big-endian on the wire, payload DWORDs likewise:
//
//   MRd32 / MWr32              CplD
//   DW0  fmt|type tc len       fmt|type tc len
//   DW1  req_id tag be         cpl_id status|bc[11:8] bc[7:0]
//   DW2  addr[31:2] 00         req_id tag lower_addr
//
// MSI is carried as a single 4-byte message {0x10, 0, 0, vector}.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pcie_dma/error.h"

namespace pcie_dma {

enum class TlpFormat : uint8_t {
  kThreeDwNoData = 0b00,
  kThreeDwWithData = 0b10,
};

inline constexpr uint8_t kTypeMemory = 0b00000;
inline constexpr uint8_t kTypeCompletion = 0b01010;
inline constexpr uint8_t kMsiMessageCode = 0x10;  // fmt 00, type Msg routed to RC

inline constexpr size_t kHeaderBytes = 12;
inline constexpr size_t kMsiBytes = 4;
inline constexpr uint16_t kMaxLengthDw = 1024;
inline constexpr uint16_t kMaxByteCount = 4096;

struct TlpHeader {
  TlpFormat fmt = TlpFormat::kThreeDwNoData;
  uint8_t tlp_type = kTypeMemory;
  uint8_t traffic_class = 0;
  uint16_t length_dw = 1;  // 1..1024, wire value 0 encodes 1024
  uint16_t requester_id = 0;
  uint8_t tag = 0;
  uint8_t first_be = 0xF;
  uint8_t last_be = 0xF;
  uint32_t address = 0;

  bool operator==(const TlpHeader&) const = default;
};

enum class CplStatus : uint8_t {
  kSuccessful = 0b000,
  kUnsupportedRequest = 0b001,
  kCompleterAbort = 0b100,
};

struct CplHeader {
  uint16_t completer_id = 0;
  CplStatus status = CplStatus::kSuccessful;
  uint16_t byte_count = 4;  // 1..4096, wire value 0 encodes 4096
  uint16_t requester_id = 0;
  uint8_t tag = 0;
  uint8_t lower_address = 0;

  bool operator==(const CplHeader&) const = default;
};

struct MemWrite32 {
  TlpHeader header;
  std::vector<uint32_t> payload;
  bool operator==(const MemWrite32&) const = default;
};

struct MemRead32 {
  TlpHeader header;
  bool operator==(const MemRead32&) const = default;
};

struct CompletionWithData {
  CplHeader header;
  std::vector<uint32_t> payload;
  bool operator==(const CompletionWithData&) const = default;
};

struct MsiMessage {
  uint8_t vector = 0;  // 5 bits
  bool operator==(const MsiMessage&) const = default;
};

using Tlp = std::variant<MemWrite32, MemRead32, CompletionWithData, MsiMessage>;

enum class TlpKind : uint8_t { kMemWrite32, kMemRead32, kCompletionWithData, kMsi };

TlpKind kind_of(const Tlp& tlp);
std::string_view kind_name(TlpKind kind);

MemWrite32 make_mem_write(uint32_t address, std::vector<uint32_t> payload,
                          uint16_t requester_id = 0, uint8_t tag = 0);
MemRead32 make_mem_read(uint32_t address, uint16_t length_dw,
                        uint16_t requester_id = 0, uint8_t tag = 0);

struct Violation {
  ErrorCode code;
  std::string message;
};

// Every violated invariant; empty exactly when encode() succeeds.
std::vector<Violation> validate(const Tlp& tlp);

std::vector<uint8_t> encode(const Tlp& tlp);
Tlp decode(std::span<const uint8_t> bytes);

// Bytes the TLP occupies on the wire before data-link framing.
size_t encoded_size(const Tlp& tlp);

// One-line dump: type, tag, address, length and the first 8 payload bytes.
std::string describe(const Tlp& tlp);

// Per-TLP overhead H added to the payload on the link.
struct OverheadConfig {
  uint32_t header_bytes = 12;  // 3DW header; 16 for 4DW
  uint32_t sequence_bytes = 2;
  uint32_t lcrc_bytes = 4;
  uint32_t framing_bytes = 2;  // STP + END symbols

  static OverheadConfig four_dw() {
    OverheadConfig c;
    c.header_bytes = 16;
    return c;
  }
  static OverheadConfig fixed(uint32_t total) {
    return OverheadConfig{total, 0, 0, 0};
  }
};

uint32_t wire_overhead_bytes(const OverheadConfig& config = {});

}  // namespace pcie_dma
