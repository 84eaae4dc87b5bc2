#include "pcie_dma/register_file.h"

#include <cstdio>

#include "pcie_dma/error.h"

namespace pcie_dma {
namespace {

using enum Access;

constexpr std::array<RegisterInfo, 14> kRegisters = {{
    {bar0::kInit, "INIT", kReadWrite, kReadOnly, std::nullopt, "initialization flag"},
    {bar0::kMwrStart, "MWR_START", kReadWrite, kReadWrite, RegisterEdge::kMwrStart,
     "MWR start trigger (self-clearing)"},
    {bar0::kMwrAddr, "MWR_ADDR", kReadWrite, kReadOnly, std::nullopt, "MWR host byte address"},
    {bar0::kMwrLen, "MWR_LEN", kReadWrite, kReadOnly, std::nullopt, "MWR payload DWORDs per TLP"},
    {bar0::kMwrCount, "MWR_COUNT", kReadWrite, kReadOnly, std::nullopt, "MWR TLP count"},
    {bar0::kMrdStart, "MRD_START", kReadWrite, kReadWrite, RegisterEdge::kMrdStart,
     "MRD start trigger (self-clearing)"},
    {bar0::kMrdAddr, "MRD_ADDR", kReadWrite, kReadOnly, std::nullopt, "MRD host byte address"},
    {bar0::kMrdLen, "MRD_LEN", kReadWrite, kReadOnly, std::nullopt, "MRD payload DWORDs per TLP"},
    {bar0::kMrdCount, "MRD_COUNT", kReadWrite, kReadOnly, std::nullopt, "MRD TLP count"},
    {bar0::kIntStatus, "INT_STATUS", kReadOnly, kReadWrite, std::nullopt,
     "bit0 MWR-done MSI pending, bit1 MRD-done MSI pending"},
    {bar0::kIntAck, "INT_ACK", kReadWrite, kReadWrite, RegisterEdge::kIntAck,
     "interrupt processed done (self-clearing)"},
    {bar0::kMrdStop, "MRD_STOP", kReadWrite, kReadWrite, RegisterEdge::kMrdStop,
     "MRD stop command (self-clearing)"},
    {bar0::kMwrPerf, "MWR_PERF", kReadOnly, kReadWrite, std::nullopt, "MWR cycle counter"},
    {bar0::kMrdPerf, "MRD_PERF", kReadOnly, kReadWrite, std::nullopt, "MRD cycle counter"},
}};

std::string_view access_name(Access a) { return a == kReadWrite ? "rw" : "ro"; }

}  // namespace

std::string_view edge_name(RegisterEdge edge) {
  switch (edge) {
    case RegisterEdge::kMwrStart: return "MwrStartEdge";
    case RegisterEdge::kMrdStart: return "MrdStartEdge";
    case RegisterEdge::kIntAck: return "IntAckEdge";
    case RegisterEdge::kMrdStop: return "MrdStopEdge";
  }
  return "?";
}

std::span<const RegisterInfo> register_map() { return kRegisters; }

const RegisterInfo* find_register(uint32_t offset) {
  // The map is dense from 0x000 to 0x034.
  const uint32_t index = offset / 4;
  if (offset % 4 != 0 || index >= kRegisters.size()) return nullptr;
  return &kRegisters[index];
}

void RegisterFile::check_access(uint32_t offset) {
  if (offset >= bar0::kBlockBytes) {
    throw SimError(ErrorCode::kOutOfRange, "BAR0 offset " + std::to_string(offset));
  }
  if (offset % 4 != 0) {
    throw SimError(ErrorCode::kUnalignedAccess, "BAR0 offset " + std::to_string(offset));
  }
}

uint32_t RegisterFile::read32(uint32_t offset) const {
  check_access(offset);
  return words_[offset / 4];
}

WriteReport RegisterFile::write32(uint32_t offset, uint32_t value, Side side) {
  check_access(offset);
  const RegisterInfo* info = find_register(offset);
  if (info == nullptr) return {false, std::nullopt, "unmapped"};
  const Access access = side == Side::kHost ? info->host : info->endpoint;
  if (access == kReadOnly) return {false, std::nullopt, "read-only"};

  uint32_t& word = words_[offset / 4];
  const uint32_t old = word;
  word = value;
  WriteReport report{true, std::nullopt, "ok"};
  if (info->edge && side == Side::kHost) {
    if (value == 0) {
      pending_edges_ &= static_cast<uint8_t>(~bit(*info->edge));
    } else if (old == 0) {
      pending_edges_ |= bit(*info->edge);
      report.edge = info->edge;
    }
  }
  return report;
}

bool RegisterFile::consume_edge(RegisterEdge edge) {
  if (!edge_pending(edge)) return false;
  pending_edges_ &= static_cast<uint8_t>(~bit(edge));
  for (const auto& r : kRegisters) {
    if (r.edge == edge) words_[r.offset / 4] = 0;
  }
  return true;
}

void RegisterFile::set_status_bits(uint32_t mask) { words_[bar0::kIntStatus / 4] |= mask; }

void RegisterFile::clear_status_bits(uint32_t mask) {
  words_[bar0::kIntStatus / 4] &= ~mask;
}

std::vector<RegisterEntry> RegisterFile::snapshot() const {
  std::vector<RegisterEntry> out;
  out.reserve(kRegisters.size());
  for (const auto& r : kRegisters) out.push_back({r.offset, r.name, words_[r.offset / 4]});
  return out;
}

std::string format_register_map() {
  std::string out = "offset  name        host  endpoint  description\n";
  char line[128];
  for (const auto& r : kRegisters) {
    std::snprintf(line, sizeof line, "0x%03x   %-10.*s  %-4.*s  %-8.*s  %.*s\n", r.offset,
                  static_cast<int>(r.name.size()), r.name.data(),
                  2, access_name(r.host).data(), 2, access_name(r.endpoint).data(),
                  static_cast<int>(r.description.size()), r.description.data());
    out += line;
  }
  std::snprintf(line, sizeof line, "block size: %u bytes\n", bar0::kBlockBytes);
  out += line;
  return out;
}

}  // namespace pcie_dma
