#include "pcie_dma/tlp.h"

#include <algorithm>
#include <cstdio>

namespace pcie_dma {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_be32(std::span<const uint8_t> b, size_t at) {
  return (uint32_t{b[at]} << 24) | (uint32_t{b[at + 1]} << 16) |
         (uint32_t{b[at + 2]} << 8) | uint32_t{b[at + 3]};
}

uint32_t length_field(size_t length_dw) {
  return static_cast<uint32_t>(length_dw) & 0x3FF;  // 1024 wraps to 0
}

uint32_t dw0(TlpFormat fmt, uint8_t type, uint8_t tc, size_t length_dw) {
  return (uint32_t{static_cast<uint8_t>(fmt)} << 29) | (uint32_t{type} << 24) |
         (uint32_t{tc} << 20) | length_field(length_dw);
}

bool known_status(CplStatus s) {
  return s == CplStatus::kSuccessful || s == CplStatus::kUnsupportedRequest ||
         s == CplStatus::kCompleterAbort;
}

void check_request_header(const TlpHeader& h, TlpFormat want_fmt,
                          std::vector<Violation>& out) {
  if (h.fmt != want_fmt) {
    out.push_back({ErrorCode::kStructuralViolation,
                   want_fmt == TlpFormat::kThreeDwNoData
                       ? "MemRead32 must use the 3DW no-data format"
                       : "MemWrite32 must use the 3DW with-data format"});
  }
  if (h.tlp_type != kTypeMemory) {
    out.push_back({ErrorCode::kStructuralViolation,
                   "memory request type code must be 0b00000"});
  }
  if (h.length_dw < 1 || h.length_dw > kMaxLengthDw) {
    out.push_back({ErrorCode::kInvalidLength, "length_dw outside [1, 1024]"});
  }
  if (h.address % 4 != 0) {
    out.push_back({ErrorCode::kMisalignedAddress, "address not DWORD-aligned"});
  }
  if (h.traffic_class > 7) {
    out.push_back({ErrorCode::kInvalidField, "traffic_class exceeds 3 bits"});
  }
  if (h.first_be > 0xF || h.last_be > 0xF) {
    out.push_back({ErrorCode::kInvalidField, "byte enables exceed 4 bits"});
  }
}

}  // namespace

TlpKind kind_of(const Tlp& tlp) { return static_cast<TlpKind>(tlp.index()); }

std::string_view kind_name(TlpKind kind) {
  switch (kind) {
    case TlpKind::kMemWrite32: return "MWr32";
    case TlpKind::kMemRead32: return "MRd32";
    case TlpKind::kCompletionWithData: return "CplD";
    case TlpKind::kMsi: return "MSI";
  }
  return "?";
}

MemWrite32 make_mem_write(uint32_t address, std::vector<uint32_t> payload,
                          uint16_t requester_id, uint8_t tag) {
  MemWrite32 t;
  t.header.fmt = TlpFormat::kThreeDwWithData;
  t.header.length_dw = static_cast<uint16_t>(payload.size());
  t.header.requester_id = requester_id;
  t.header.tag = tag;
  t.header.last_be = payload.size() == 1 ? 0x0 : 0xF;
  t.header.address = address;
  t.payload = std::move(payload);
  return t;
}

MemRead32 make_mem_read(uint32_t address, uint16_t length_dw,
                        uint16_t requester_id, uint8_t tag) {
  MemRead32 t;
  t.header.fmt = TlpFormat::kThreeDwNoData;
  t.header.length_dw = length_dw;
  t.header.requester_id = requester_id;
  t.header.tag = tag;
  t.header.last_be = length_dw == 1 ? 0x0 : 0xF;
  t.header.address = address;
  return t;
}

std::vector<Violation> validate(const Tlp& tlp) {
  std::vector<Violation> out;
  std::visit(
      Overloaded{
          [&](const MemWrite32& t) {
            check_request_header(t.header, TlpFormat::kThreeDwWithData, out);
            if (t.payload.size() != t.header.length_dw) {
              out.push_back({ErrorCode::kPayloadLengthMismatch,
                             "payload DWORD count differs from length_dw"});
            }
          },
          [&](const MemRead32& t) {
            check_request_header(t.header, TlpFormat::kThreeDwNoData, out);
          },
          [&](const CompletionWithData& t) {
            const auto& h = t.header;
            if (t.payload.empty() || t.payload.size() > kMaxLengthDw) {
              out.push_back({ErrorCode::kInvalidLength,
                             "completion payload outside [1, 1024] DWORDs"});
            }
            if (!known_status(h.status)) {
              out.push_back({ErrorCode::kInvalidField, "unknown completion status"});
            }
            if (h.byte_count < 1 || h.byte_count > kMaxByteCount) {
              out.push_back({ErrorCode::kInvalidField, "byte_count outside [1, 4096]"});
            } else if (h.byte_count < 4 * t.payload.size()) {
              out.push_back({ErrorCode::kPayloadLengthMismatch,
                             "byte_count smaller than the carried payload"});
            }
            if (h.lower_address > 0x7F) {
              out.push_back({ErrorCode::kInvalidField, "lower_address exceeds 7 bits"});
            }
          },
          [&](const MsiMessage& t) {
            if (t.vector > 0x1F) {
              out.push_back({ErrorCode::kInvalidField, "MSI vector exceeds 5 bits"});
            }
          },
      },
      tlp);
  return out;
}

size_t encoded_size(const Tlp& tlp) {
  return std::visit(
      Overloaded{
          [](const MemWrite32& t) { return kHeaderBytes + 4 * t.payload.size(); },
          [](const MemRead32&) { return kHeaderBytes; },
          [](const CompletionWithData& t) { return kHeaderBytes + 4 * t.payload.size(); },
          [](const MsiMessage&) { return kMsiBytes; },
      },
      tlp);
}

std::vector<uint8_t> encode(const Tlp& tlp) {
  if (auto v = validate(tlp); !v.empty()) {
    throw SimError(v.front().code, v.front().message);
  }
  std::vector<uint8_t> out;
  out.reserve(encoded_size(tlp));
  auto put_request = [&](const TlpHeader& h) {
    put_be32(out, dw0(h.fmt, h.tlp_type, h.traffic_class, h.length_dw));
    put_be32(out, (uint32_t{h.requester_id} << 16) | (uint32_t{h.tag} << 8) |
                      (uint32_t{h.last_be} << 4) | h.first_be);
    put_be32(out, h.address & ~uint32_t{3});
  };
  std::visit(
      Overloaded{
          [&](const MemWrite32& t) {
            put_request(t.header);
            for (uint32_t dw : t.payload) put_be32(out, dw);
          },
          [&](const MemRead32& t) { put_request(t.header); },
          [&](const CompletionWithData& t) {
            const auto& h = t.header;
            put_be32(out, dw0(TlpFormat::kThreeDwWithData, kTypeCompletion, 0,
                              t.payload.size()));
            put_be32(out, (uint32_t{h.completer_id} << 16) |
                              (uint32_t{static_cast<uint8_t>(h.status)} << 13) |
                              (h.byte_count & 0xFFFu));
            put_be32(out, (uint32_t{h.requester_id} << 16) | (uint32_t{h.tag} << 8) |
                              h.lower_address);
            for (uint32_t dw : t.payload) put_be32(out, dw);
          },
          [&](const MsiMessage& t) {
            out.insert(out.end(), {kMsiMessageCode, 0, 0, t.vector});
          },
      },
      tlp);
  return out;
}

Tlp decode(std::span<const uint8_t> bytes) {
  if (bytes.size() < kMsiBytes) {
    throw SimError(ErrorCode::kTruncatedPacket, "fewer than 4 bytes");
  }
  const uint8_t b0 = bytes[0];
  if (b0 == kMsiMessageCode) {
    if (bytes.size() != kMsiBytes) {
      throw SimError(ErrorCode::kPayloadLengthMismatch, "MSI message must be 4 bytes");
    }
    return MsiMessage{static_cast<uint8_t>(bytes[3] & 0x1F)};
  }
  if (bytes.size() < kHeaderBytes) {
    throw SimError(ErrorCode::kTruncatedPacket, "fewer than 12 header bytes");
  }
  if (b0 & 0x80) {
    throw SimError(ErrorCode::kUnknownTypeCode, "TLP prefixes are not supported");
  }
  const auto fmt_bits = static_cast<uint8_t>((b0 >> 5) & 0x3);
  const auto type = static_cast<uint8_t>(b0 & 0x1F);
  const uint32_t d0 = get_be32(bytes, 0);
  const uint32_t d1 = get_be32(bytes, 4);
  const uint32_t d2 = get_be32(bytes, 8);
  const auto tc = static_cast<uint8_t>((d0 >> 20) & 0x7);
  uint16_t length = static_cast<uint16_t>(d0 & 0x3FF);
  if (length == 0) length = kMaxLengthDw;

  auto read_payload = [&]() {
    const size_t want = kHeaderBytes + 4 * size_t{length};
    if (bytes.size() != want) {
      throw SimError(ErrorCode::kPayloadLengthMismatch,
                     "header declares " + std::to_string(length) + " DWORDs, " +
                         std::to_string(bytes.size() - kHeaderBytes) +
                         " payload bytes present");
    }
    std::vector<uint32_t> payload(length);
    for (size_t i = 0; i < length; ++i) payload[i] = get_be32(bytes, kHeaderBytes + 4 * i);
    return payload;
  };
  auto request_header = [&](TlpFormat fmt) {
    TlpHeader h;
    h.fmt = fmt;
    h.tlp_type = type;
    h.traffic_class = tc;
    h.length_dw = length;
    h.requester_id = static_cast<uint16_t>(d1 >> 16);
    h.tag = static_cast<uint8_t>(d1 >> 8);
    h.last_be = static_cast<uint8_t>((d1 >> 4) & 0xF);
    h.first_be = static_cast<uint8_t>(d1 & 0xF);
    h.address = d2 & ~uint32_t{3};
    return h;
  };

  if (fmt_bits == 0b01 || fmt_bits == 0b11) {
    throw SimError(ErrorCode::kUnknownTypeCode, "4DW headers are not supported");
  }
  if (type == kTypeMemory && fmt_bits == 0b00) {
    if (bytes.size() != kHeaderBytes) {
      throw SimError(ErrorCode::kPayloadLengthMismatch, "MRd32 carries no payload");
    }
    return MemRead32{request_header(TlpFormat::kThreeDwNoData)};
  }
  if (type == kTypeMemory && fmt_bits == 0b10) {
    auto h = request_header(TlpFormat::kThreeDwWithData);
    return MemWrite32{h, read_payload()};
  }
  if (type == kTypeCompletion && fmt_bits == 0b10) {
    CplHeader h;
    h.completer_id = static_cast<uint16_t>(d1 >> 16);
    h.status = static_cast<CplStatus>((d1 >> 13) & 0x7);
    if (!known_status(h.status)) {
      throw SimError(ErrorCode::kInvalidField, "unknown completion status");
    }
    h.byte_count = static_cast<uint16_t>(d1 & 0xFFF);
    if (h.byte_count == 0) h.byte_count = kMaxByteCount;
    h.requester_id = static_cast<uint16_t>(d2 >> 16);
    h.tag = static_cast<uint8_t>(d2 >> 8);
    h.lower_address = static_cast<uint8_t>(d2 & 0x7F);
    CompletionWithData cpl{h, read_payload()};
    if (h.byte_count < 4 * cpl.payload.size()) {
      throw SimError(ErrorCode::kPayloadLengthMismatch,
                     "byte_count smaller than the carried payload");
    }
    return cpl;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "fmt=%u type=0x%02x", fmt_bits, type);
  throw SimError(ErrorCode::kUnknownTypeCode, buf);
}

std::string describe(const Tlp& tlp) {
  char buf[160];
  auto payload_prefix = [](std::span<const uint32_t> p) {
    std::string s;
    char w[12];
    for (size_t i = 0; i < std::min<size_t>(p.size(), 2); ++i) {
      std::snprintf(w, sizeof w, "%s%08x", i ? " " : "", p[i]);
      s += w;
    }
    return s;
  };
  std::visit(
      Overloaded{
          [&](const MemWrite32& t) {
            std::snprintf(buf, sizeof buf, "MWr32 tag=0x%02x addr=0x%08x len=%u data=%s",
                          t.header.tag, t.header.address, t.header.length_dw,
                          payload_prefix(t.payload).c_str());
          },
          [&](const MemRead32& t) {
            std::snprintf(buf, sizeof buf, "MRd32 tag=0x%02x addr=0x%08x len=%u",
                          t.header.tag, t.header.address, t.header.length_dw);
          },
          [&](const CompletionWithData& t) {
            std::snprintf(buf, sizeof buf,
                          "CplD tag=0x%02x lower_addr=0x%02x len=%zu byte_count=%u data=%s",
                          t.header.tag, t.header.lower_address, t.payload.size(),
                          t.header.byte_count, payload_prefix(t.payload).c_str());
          },
          [&](const MsiMessage& t) {
            std::snprintf(buf, sizeof buf, "MSI vector=%u", t.vector);
          },
      },
      tlp);
  return buf;
}

uint32_t wire_overhead_bytes(const OverheadConfig& config) {
  return config.header_bytes + config.sequence_bytes + config.lcrc_bytes +
         config.framing_bytes;
}

}  // namespace pcie_dma
