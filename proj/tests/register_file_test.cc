#include <gtest/gtest.h>

#include <random>

#include "pcie_dma/error.h"
#include "pcie_dma/register_file.h"

namespace pcie_dma {
namespace {

ErrorCode read_error(const RegisterFile& regs, uint32_t offset) {
  try {
    regs.read32(offset);
  } catch (const SimError& e) {
    return e.code();
  }
  ADD_FAILURE() << "read succeeded";
  return ErrorCode::kIoFailure;
}

TEST(RegisterFile, StatusBitAfterMwrDone) {
  RegisterFile regs;
  regs.set_status_bits(bar0::kIntMwrDone);
  EXPECT_EQ(regs.read32(bar0::kIntStatus) & 1u, 1u);
}

TEST(RegisterFile, UnmappedReadsZero) {
  RegisterFile regs;
  EXPECT_EQ(regs.read32(0x100), 0u);
  const auto r = regs.write32(0x100, 5, Side::kHost);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.note, "unmapped");
  EXPECT_EQ(regs.read32(0x100), 0u);
}

TEST(RegisterFile, AccessErrors) {
  RegisterFile regs;
  EXPECT_EQ(read_error(regs, 0x002), ErrorCode::kUnalignedAccess);
  EXPECT_EQ(read_error(regs, 2048), ErrorCode::kOutOfRange);
  EXPECT_THROW(regs.write32(0x005, 1, Side::kHost), SimError);
}

TEST(RegisterFile, HostStartWriteRaisesEdge) {
  RegisterFile regs;
  const auto r = regs.write32(bar0::kMwrStart, 1, Side::kHost);
  EXPECT_TRUE(r.accepted);
  ASSERT_TRUE(r.edge.has_value());
  EXPECT_EQ(*r.edge, RegisterEdge::kMwrStart);
  EXPECT_TRUE(regs.edge_pending(RegisterEdge::kMwrStart));
  EXPECT_FALSE(regs.edge_pending(RegisterEdge::kMrdStart));
}

TEST(RegisterFile, HostWriteToCounterIsReadOnly) {
  RegisterFile regs;
  const auto r = regs.write32(bar0::kMwrPerf, 7, Side::kHost);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.note, "read-only");
  EXPECT_EQ(regs.read32(bar0::kMwrPerf), 0u);
}

TEST(RegisterFile, EndpointWritesStatusWithoutEdge) {
  RegisterFile regs;
  const auto r = regs.write32(bar0::kIntStatus, 0b01, Side::kEndpoint);
  EXPECT_TRUE(r.accepted);
  EXPECT_FALSE(r.edge.has_value());
  EXPECT_EQ(regs.read32(bar0::kIntStatus), 1u);
  EXPECT_FALSE(regs.any_edge_pending());
}

TEST(RegisterFile, SnapshotFreshIsZero) {
  RegisterFile regs;
  const auto snap = regs.snapshot();
  ASSERT_EQ(snap.size(), register_map().size());
  for (const auto& e : snap) EXPECT_EQ(e.value, 0u) << e.name;
}

TEST(RegisterFile, SnapshotReflectsProgramming) {
  RegisterFile regs;
  regs.write32(bar0::kMwrAddr, 0x80000000, Side::kHost);
  regs.write32(bar0::kMwrLen, 4, Side::kHost);
  regs.write32(bar0::kMwrCount, 4096, Side::kHost);
  const auto snap = regs.snapshot();
  auto value_of = [&](std::string_view name) {
    for (const auto& e : snap) {
      if (e.name == name) return e.value;
    }
    ADD_FAILURE() << name;
    return 0u;
  };
  EXPECT_EQ(value_of("MWR_ADDR"), 0x80000000u);
  EXPECT_EQ(value_of("MWR_LEN"), 4u);
  EXPECT_EQ(value_of("MWR_COUNT"), 4096u);
  EXPECT_EQ(regs.snapshot(), snap);
}

TEST(RegisterFile, MapIsOrderedAndLookupConsistent) {
  const auto map = register_map();
  for (size_t i = 0; i < map.size(); ++i) {
    const auto& r = map[i];
    if (i > 0) {
      EXPECT_GT(r.offset, map[i - 1].offset);
    }
    ASSERT_NE(find_register(r.offset), nullptr);
    EXPECT_EQ(find_register(r.offset)->name, r.name);
  }
  EXPECT_EQ(find_register(0x038), nullptr);
  EXPECT_EQ(find_register(0x001), nullptr);
}

TEST(RegisterFile, EdgeFiresOncePerTransition) {
  RegisterFile regs;
  EXPECT_TRUE(regs.write32(bar0::kMrdStart, 1, Side::kHost).edge);
  // Second write while the trigger is still set: no new transition.
  EXPECT_FALSE(regs.write32(bar0::kMrdStart, 3, Side::kHost).edge);
  EXPECT_TRUE(regs.consume_edge(RegisterEdge::kMrdStart));
  EXPECT_FALSE(regs.consume_edge(RegisterEdge::kMrdStart));
  EXPECT_EQ(regs.read32(bar0::kMrdStart), 0u);
  EXPECT_TRUE(regs.write32(bar0::kMrdStart, 1, Side::kHost).edge);
}

TEST(RegisterFile, ZeroWriteCancelsPendingEdge) {
  RegisterFile regs;
  regs.write32(bar0::kIntAck, 1, Side::kHost);
  regs.write32(bar0::kIntAck, 0, Side::kHost);
  EXPECT_FALSE(regs.edge_pending(RegisterEdge::kIntAck));
}

TEST(RegisterFile, EndpointTriggerWritesRaiseNoEdge) {
  RegisterFile regs;
  EXPECT_FALSE(regs.write32(bar0::kMwrStart, 1, Side::kEndpoint).edge);
  EXPECT_FALSE(regs.any_edge_pending());
}

TEST(RegisterFileProperty, ReadAfterWrite) {
  std::mt19937 rng(11);
  RegisterFile regs;
  std::array<uint32_t, bar0::kBlockBytes / 4> model{};
  for (int i = 0; i < 5000; ++i) {
    const uint32_t offset = 4 * (rng() % 16);
    const Side side = rng() % 2 ? Side::kHost : Side::kEndpoint;
    const uint32_t value = rng() % 4 == 0 ? 0 : rng();
    const auto r = regs.write32(offset, value, side);
    if (r.accepted) model[offset / 4] = value;
    ASSERT_EQ(regs.read32(offset), model[offset / 4]) << offset;
  }
}

TEST(RegisterFileProperty, PolicyIsTotalAndIgnoresDoNotMutate) {
  for (uint32_t offset = 0; offset < bar0::kBlockBytes; offset += 4) {
    for (Side side : {Side::kHost, Side::kEndpoint}) {
      RegisterFile regs;
      const auto before = regs.snapshot();
      const auto r = regs.write32(offset, 0xA5A5A5A5, side);
      EXPECT_TRUE(r.note == "ok" || r.note == "read-only" || r.note == "unmapped");
      EXPECT_EQ(r.accepted, r.note == "ok");
      if (!r.accepted) {
        EXPECT_EQ(regs.snapshot(), before);
        EXPECT_FALSE(regs.any_edge_pending());
        EXPECT_EQ(regs.read32(offset), 0u);
      }
      const RegisterInfo* info = find_register(offset);
      if (info) {
        const Access a = side == Side::kHost ? info->host : info->endpoint;
        EXPECT_EQ(r.accepted, a == Access::kReadWrite) << info->name;
      } else {
        EXPECT_EQ(r.note, "unmapped");
      }
    }
  }
}

TEST(RegisterFile, FormatMapListsEveryRegister) {
  const std::string table = format_register_map();
  for (const auto& r : register_map()) {
    EXPECT_NE(table.find(std::string(r.name)), std::string::npos) << r.name;
  }
  EXPECT_NE(table.find("0x034"), std::string::npos);
}

}  // namespace
}  // namespace pcie_dma
