#pragma once

// Deterministic cycle engine. Each step is one 8 ns user clock, run in a
// fixed phase order:
//   1. host: release a due completion onto the completion interface, advance
//      the ISR countdown and run the ISR (register writes take effect now)
//   2. endpoint: FSMs tick; the current completion beat, if any, is
//      delivered to the RX engine in this phase
//   3. link: TLPs and MSIs the endpoint finished this cycle reach the host
// The transport adds no latency; all waiting lives in the host queues.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcie_dma/dma_endpoint.h"
#include "pcie_dma/host_driver.h"
#include "pcie_dma/register_file.h"
#include "pcie_dma/tlp.h"
#include "pcie_dma/trace.h"

namespace pcie_dma {

struct SimConfig {
  uint32_t lanes = 8;
  uint32_t generation = 1;
  uint32_t clock_period_ns = 8;
  uint32_t beat_bytes = 16;
  uint64_t cpl_latency_cycles = 64;
  uint64_t isr_latency_cycles = 32;
  OverheadConfig overhead;
  uint64_t max_cycles = 100'000'000;
  bool trace = false;
  uint32_t seed = 0;
  uint32_t rx_base = 0x8000'0000;
  uint32_t rx_bytes = kDmaBufferBytes;
  // 0 places the MRD source buffer directly after the MWR destination.
  uint32_t tx_base = 0;
  uint32_t tx_bytes = kDmaBufferBytes;
  bool split_completions = false;

  uint32_t effective_tx_base() const { return tx_base != 0 ? tx_base : rx_base + rx_bytes; }
  // Matches the measured hardware: Gen1 x8 with a 125 MHz, 128-bit user clock.
  bool paper_conformant() const {
    return lanes == 8 && clock_period_ns == 8 && beat_bytes == 16 && generation == 1;
  }
};

struct InterruptCounts {
  uint64_t mwr = 0;
  uint64_t mrd = 0;
  bool operator==(const InterruptCounts&) const = default;
};

struct RunResult {
  uint64_t total_cycles = 0;
  uint64_t mwr_perf = 0;
  uint64_t mrd_perf = 0;
  uint64_t bytes_written = 0;
  uint64_t bytes_read = 0;
  double v_mwr_gbps = 0.0;
  double v_mrd_gbps = 0.0;
  InterruptCounts interrupts;
  uint64_t mismatches = 0;
  bool conformant = true;
  std::vector<TraceEvent> trace;
};

// JSON object with the fixed run-report schema.
std::string run_result_json(const RunResult& r);

class System {
 public:
  explicit System(const SimConfig& config);

  // Advances one cycle and returns that cycle's events.
  const std::vector<TraceEvent>& step();

  // Steps until both engines and the host are quiescent.
  RunResult run_until_idle();

  ProgramReport program_mwr(uint32_t addr, uint32_t len_dw, uint32_t count);
  ProgramReport program_mrd(uint32_t addr, uint32_t len_dw, uint32_t count);

  bool idle() const;
  // Work is outstanding but nothing can make progress.
  bool stalled() const;
  std::string describe_state() const;

  Cycle cycle() const { return cycle_; }
  bool halted() const { return halted_; }
  const SimConfig& config() const { return config_; }
  RegisterFile& regs() { return regs_; }
  const RegisterFile& regs() const { return regs_; }
  DmaEndpoint& endpoint() { return endpoint_; }
  const DmaEndpoint& endpoint() const { return endpoint_; }
  HostDriver& host() { return host_; }
  const HostDriver& host() const { return host_; }
  const std::vector<TraceEvent>& trace() const { return log_.history(); }
  // describe() of every TLP crossing the link when tracing is on.
  const std::vector<std::string>& tlp_log() const { return tlp_log_; }

 private:
  struct InboundStream {
    Tlp tlp;
    uint16_t next = 0;
    uint16_t total = 0;
  };

  void deliver(const Tlp& tlp);

  SimConfig config_;
  RegisterFile regs_;
  DmaEndpoint endpoint_;
  HostDriver host_;
  EventLog log_;
  std::optional<InboundStream> inbound_;
  Cycle cycle_ = 0;
  bool halted_ = false;
  std::vector<std::string> tlp_log_;
};

System build_system(const SimConfig& config);

}  // namespace pcie_dma
