#pragma once

// BAR0 register block of the endpoint: 2 KB, 32-bit registers, used for all
// host <-> FPGA handshaking.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcie_dma {

namespace bar0 {
inline constexpr uint32_t kInit = 0x000;
inline constexpr uint32_t kMwrStart = 0x004;
inline constexpr uint32_t kMwrAddr = 0x008;
inline constexpr uint32_t kMwrLen = 0x00C;  // DWORDs per TLP
inline constexpr uint32_t kMwrCount = 0x010;
inline constexpr uint32_t kMrdStart = 0x014;
inline constexpr uint32_t kMrdAddr = 0x018;
inline constexpr uint32_t kMrdLen = 0x01C;  // DWORDs per TLP
inline constexpr uint32_t kMrdCount = 0x020;
inline constexpr uint32_t kIntStatus = 0x024;
inline constexpr uint32_t kIntAck = 0x028;
inline constexpr uint32_t kMrdStop = 0x02C;
inline constexpr uint32_t kMwrPerf = 0x030;
inline constexpr uint32_t kMrdPerf = 0x034;

inline constexpr uint32_t kBlockBytes = 2048;

inline constexpr uint32_t kIntMwrDone = 1u << 0;
inline constexpr uint32_t kIntMrdDone = 1u << 1;
}  // namespace bar0

enum class Side : uint8_t { kHost, kEndpoint };

enum class Access : uint8_t { kReadWrite, kReadOnly };

// Trigger registers raise an edge on an accepted host 0 -> non-zero write and
// self-clear when the endpoint consumes the edge.
enum class RegisterEdge : uint8_t { kMwrStart, kMrdStart, kIntAck, kMrdStop };

std::string_view edge_name(RegisterEdge edge);

struct RegisterInfo {
  uint32_t offset;
  std::string_view name;
  Access host;
  Access endpoint;
  std::optional<RegisterEdge> edge;
  std::string_view description;
};

// Every named register, ordered by offset.
std::span<const RegisterInfo> register_map();
const RegisterInfo* find_register(uint32_t offset);

struct WriteReport {
  bool accepted = false;
  std::optional<RegisterEdge> edge;
  std::string_view note;  // "ok", "read-only", "unmapped"
};

struct RegisterEntry {
  uint32_t offset;
  std::string_view name;
  uint32_t value;
  bool operator==(const RegisterEntry&) const = default;
};

class RegisterFile {
 public:
  uint32_t read32(uint32_t offset) const;
  WriteReport write32(uint32_t offset, uint32_t value, Side side);

  std::vector<RegisterEntry> snapshot() const;

  bool edge_pending(RegisterEdge edge) const {
    return (pending_edges_ & bit(edge)) != 0;
  }
  bool any_edge_pending() const { return pending_edges_ != 0; }

  // Endpoint side: returns true if the edge was pending, then clears both the
  // pending flag and the trigger register.
  bool consume_edge(RegisterEdge edge);

  // Endpoint-side helpers for INT_STATUS bit manipulation.
  void set_status_bits(uint32_t mask);
  void clear_status_bits(uint32_t mask);

 private:
  static constexpr uint8_t bit(RegisterEdge e) {
    return static_cast<uint8_t>(1u << static_cast<unsigned>(e));
  }
  static void check_access(uint32_t offset);

  std::array<uint32_t, bar0::kBlockBytes / 4> words_{};
  uint8_t pending_edges_ = 0;
};

// Fixed-format register map table, as printed by `regmap`.
std::string format_register_map();

}  // namespace pcie_dma
