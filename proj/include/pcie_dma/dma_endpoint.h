#pragma once

// FPGA-side bus master: the MWR TX engine, the MRD RX engine, the MSI
// interrupt controller and the data pattern used to check both directions.
//
// Timing, in 8 ns user clocks on the 128-bit interface:
//   - a TLP occupies one request/descriptor beat plus ceil(4*PL/16) data beats;
//     MRd32 is a single descriptor beat
//   - consecutive MWr TLPs are separated by one dummy beat; none follows the
//     last TLP
//   - the MWR counter runs from the cycle the start edge is consumed through
//     the cycle of the final data beat (mwr_done)
//   - the MRD counter advances once per valid RX beat (completion header and
//     payload beats)
//   - MSI leaves on the interrupt interface in the cycle it is raised; the
//     raising engine enters WaitIntDone in the same cycle

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pcie_dma/register_file.h"
#include "pcie_dma/tlp.h"
#include "pcie_dma/trace.h"

namespace pcie_dma {

enum class TxState : uint8_t { kIdle = 0, kLoadDescriptor = 1, kSendData = 2, kWaitIntDone = 3 };

enum class RxState : uint8_t {
  kIdle = 0,
  kIssueMrd = 1,
  kWaitStop = 2,
  kGenMsi = 3,
  kWaitIntDone = 4,
};

struct DmaDescriptor {
  uint32_t address = 0;
  uint16_t payload_len_dw = 0;
  uint32_t count = 0;
  uint32_t cursor = 0;  // TLPs completed
  uint32_t write_pointer = 0;

  bool consistent() const {
    return cursor <= count &&
           write_pointer == address + 4u * payload_len_dw * cursor;
  }
  uint64_t data_bytes() const { return 4ull * payload_len_dw * count; }
};

uint32_t generate_pattern(uint32_t seed, uint32_t offset_dw);

struct PatternMismatch {
  uint32_t index;  // position in the checked payload
  uint32_t expected;
  uint32_t actual;
  bool operator==(const PatternMismatch&) const = default;
};

std::vector<PatternMismatch> verify_pattern(uint32_t seed, uint32_t base_offset_dw,
                                            std::span<const uint32_t> payload);

inline constexpr uint32_t next_pattern_seed(uint32_t seed) { return seed + 1; }

// A beat of an inbound (host -> endpoint) TLP on the completion interface.
struct InboundBeat {
  const Tlp* tlp = nullptr;
  uint16_t index = 0;
  uint16_t total = 0;
  bool last() const { return index + 1 == total; }
};

struct EndpointOutput {
  std::optional<Tlp> tlp;          // request TLP whose final beat left this cycle
  std::optional<MsiMessage> msi;   // message sent on the interrupt interface
};

struct EndpointConfig {
  uint32_t beat_bytes = 16;
  uint16_t requester_id = 0x0100;
  uint32_t pattern_seed = 0;
};

struct EndpointStats {
  uint64_t tlps_sent = 0;
  uint64_t msi_sent = 0;
  uint64_t rx_bytes = 0;
  uint64_t rx_dwords_checked = 0;
  uint64_t rx_mismatch_count = 0;
};

class DmaEndpoint {
 public:
  explicit DmaEndpoint(EndpointConfig config = {});

  // One 8 ns clock. Called once per cycle after the host phase.
  EndpointOutput tick(RegisterFile& regs, const InboundBeat* rx_in, Cycle now,
                      EventLog* log = nullptr);

  // Latches the MSI for `cause`; the engine enters WaitIntDone once sent.
  MsiMessage raise_msi(RegisterFile& regs, MsiCause cause);

  // Returns false to hold the TX engine before a TLP's request beat.
  void set_data_ready_hook(std::function<bool(Cycle)> hook) { data_ready_ = std::move(hook); }

  TxState tx_state() const { return tx_; }
  RxState rx_state() const { return rx_; }
  const DmaDescriptor& tx_descriptor() const { return tx_desc_; }
  const DmaDescriptor& rx_descriptor() const { return rx_desc_; }
  bool msi_pending() const { return msi_pending_.has_value(); }
  std::optional<MsiCause> pending_cause() const { return msi_pending_; }
  std::optional<uint8_t> outstanding_tag() const { return outstanding_tag_; }
  uint64_t mwr_counter() const { return mwr_counter_; }
  uint64_t mrd_counter() const { return mrd_counter_; }
  uint32_t tx_seed() const { return tx_seed_; }
  uint32_t rx_seed() const { return rx_seed_; }
  const EndpointStats& stats() const { return stats_; }
  // First mismatches seen by the RX checker (bounded).
  const std::vector<PatternMismatch>& rx_mismatches() const { return rx_mismatches_; }
  // D of the last completed MWR / MRD run, in bytes.
  uint64_t last_mwr_bytes() const { return last_mwr_bytes_; }
  uint64_t last_mrd_bytes() const { return last_mrd_bytes_; }

  // Progress is possible without further host action.
  bool has_autonomous_work() const;
  bool idle() const {
    return tx_ == TxState::kIdle && rx_ == RxState::kIdle && !msi_pending_;
  }

  uint16_t data_beats(uint32_t payload_len_dw) const;

 private:
  void set_tx(TxState s, EventLog* log);
  void set_rx(RxState s, EventLog* log);
  void handle_acks(RegisterFile& regs, EventLog* log);
  DmaDescriptor latch(const RegisterFile& regs, uint32_t addr_reg, uint32_t len_reg,
                      uint32_t count_reg, RegisterEdge edge);
  // Returns true when the TX engine used the output port this cycle.
  bool tick_tx(RegisterFile& regs, Cycle now, EndpointOutput& out, EventLog* log);
  bool tick_rx(RegisterFile& regs, const InboundBeat* rx_in, bool port_busy,
               EndpointOutput& out, EventLog* log);
  void publish(RegisterFile& regs, CounterId id, uint64_t value, EventLog* log);
  void emit_msi(RegisterFile& regs, MsiCause cause, EndpointOutput& out, EventLog* log);

  EndpointConfig config_;
  std::function<bool(Cycle)> data_ready_;

  TxState tx_ = TxState::kIdle;
  DmaDescriptor tx_desc_;
  bool tx_counting_ = false;
  bool tx_done_ = false;       // final data beat sent, MSI not yet out
  uint16_t tx_beat_ = 0;       // next beat index within the current TLP
  bool tx_gap_ = false;        // dummy beat owed before the next TLP
  std::optional<MemWrite32> tx_tlp_;

  RxState rx_ = RxState::kIdle;
  DmaDescriptor rx_desc_;
  std::optional<uint8_t> outstanding_tag_;
  uint8_t next_tag_ = 0;
  uint32_t rx_received_dw_ = 0;  // of the outstanding request

  std::optional<MsiCause> msi_pending_;
  uint64_t mwr_counter_ = 0;
  uint64_t mrd_counter_ = 0;
  uint32_t tx_seed_;
  uint32_t rx_seed_;
  uint64_t last_mwr_bytes_ = 0;
  uint64_t last_mrd_bytes_ = 0;
  EndpointStats stats_;
  std::vector<PatternMismatch> rx_mismatches_;
};

}  // namespace pcie_dma
