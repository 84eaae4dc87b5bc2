#pragma once

// Hand-rolled generators for property tests. Every generator draws from a
// caller-owned engine so failures reproduce from the printed seed.

#include <cstdint>
#include <random>
#include <vector>

#include "pcie_dma/tlp.h"

namespace pcie_dma::testing {

using Rng = std::mt19937_64;

inline uint32_t uniform(Rng& rng, uint32_t lo, uint32_t hi) {
  return std::uniform_int_distribution<uint32_t>(lo, hi)(rng);
}

// Biased towards the boundaries, where the length wrap lives.
inline uint16_t gen_length_dw(Rng& rng) {
  switch (uniform(rng, 0, 7)) {
    case 0: return 1;
    case 1: return kMaxLengthDw;
    case 2: return static_cast<uint16_t>(uniform(rng, 1000, kMaxLengthDw));
    default: return static_cast<uint16_t>(uniform(rng, 1, 64));
  }
}

inline std::vector<uint32_t> gen_payload(Rng& rng, size_t n) {
  std::vector<uint32_t> p(n);
  for (auto& dw : p) dw = static_cast<uint32_t>(rng());
  return p;
}

inline TlpHeader gen_request_header(Rng& rng, TlpFormat fmt, uint16_t length_dw) {
  TlpHeader h;
  h.fmt = fmt;
  h.tlp_type = kTypeMemory;
  h.traffic_class = static_cast<uint8_t>(uniform(rng, 0, 7));
  h.length_dw = length_dw;
  h.requester_id = static_cast<uint16_t>(uniform(rng, 0, 0xFFFF));
  h.tag = static_cast<uint8_t>(uniform(rng, 0, 0xFF));
  h.first_be = static_cast<uint8_t>(uniform(rng, 0, 0xF));
  h.last_be = static_cast<uint8_t>(uniform(rng, 0, 0xF));
  h.address = static_cast<uint32_t>(rng()) & ~uint32_t{3};
  return h;
}

inline Tlp gen_valid_tlp(Rng& rng) {
  switch (uniform(rng, 0, 3)) {
    case 0: {
      const uint16_t len = gen_length_dw(rng);
      return MemWrite32{gen_request_header(rng, TlpFormat::kThreeDwWithData, len),
                        gen_payload(rng, len)};
    }
    case 1:
      return MemRead32{gen_request_header(rng, TlpFormat::kThreeDwNoData, gen_length_dw(rng))};
    case 2: {
      const uint16_t len = gen_length_dw(rng);
      CompletionWithData c;
      c.header.completer_id = static_cast<uint16_t>(uniform(rng, 0, 0xFFFF));
      constexpr CplStatus kStatuses[] = {CplStatus::kSuccessful, CplStatus::kUnsupportedRequest,
                                         CplStatus::kCompleterAbort};
      c.header.status = kStatuses[uniform(rng, 0, 2)];
      c.header.byte_count = static_cast<uint16_t>(uniform(rng, 4u * len, kMaxByteCount));
      c.header.requester_id = static_cast<uint16_t>(uniform(rng, 0, 0xFFFF));
      c.header.tag = static_cast<uint8_t>(uniform(rng, 0, 0xFF));
      c.header.lower_address = static_cast<uint8_t>(uniform(rng, 0, 0x7F));
      c.payload = gen_payload(rng, len);
      return c;
    }
    default:
      return MsiMessage{static_cast<uint8_t>(uniform(rng, 0, 0x1F))};
  }
}

// Flips, truncates, extends or splices the stream.
inline std::vector<uint8_t> mutate(Rng& rng, std::vector<uint8_t> bytes) {
  const uint32_t rounds = uniform(rng, 1, 4);
  for (uint32_t r = 0; r < rounds; ++r) {
    switch (uniform(rng, 0, 4)) {
      case 0:
        if (!bytes.empty()) bytes[uniform(rng, 0, bytes.size() - 1)] ^= 1u << uniform(rng, 0, 7);
        break;
      case 1:
        if (!bytes.empty()) bytes[uniform(rng, 0, bytes.size() - 1)] = static_cast<uint8_t>(rng());
        break;
      case 2:
        bytes.resize(uniform(rng, 0, static_cast<uint32_t>(bytes.size())));
        break;
      case 3:
        for (uint32_t i = uniform(rng, 1, 8); i > 0; --i) bytes.push_back(static_cast<uint8_t>(rng()));
        break;
      default:
        if (bytes.size() >= 4) bytes[uniform(rng, 0, 3)] = static_cast<uint8_t>(rng());
        break;
    }
  }
  return bytes;
}

// Brute-force beat schedule of an MWR run on the user interface: one entry
// per clock from the start edge through the final data beat.
enum class SlotKind { kDescriptor, kData, kDummy };

inline std::vector<SlotKind> enumerate_mwr_beats(uint32_t pl_dw, uint32_t count,
                                                 uint32_t beat_bytes = 16) {
  std::vector<SlotKind> slots;
  for (uint32_t n = 0; n < count; ++n) {
    if (n > 0) slots.push_back(SlotKind::kDummy);
    slots.push_back(SlotKind::kDescriptor);
    for (uint32_t bytes = 0; bytes < 4 * pl_dw; bytes += beat_bytes) slots.push_back(SlotKind::kData);
  }
  return slots;
}

// RX-valid beats of `count` unsplit completions.
inline uint64_t enumerate_mrd_valid_beats(uint32_t pl_dw, uint32_t count,
                                          uint32_t beat_bytes = 16) {
  uint64_t valid = 0;
  for (uint32_t n = 0; n < count; ++n) {
    ++valid;
    for (uint32_t bytes = 0; bytes < 4 * pl_dw; bytes += beat_bytes) ++valid;
  }
  return valid;
}

}  // namespace pcie_dma::testing
