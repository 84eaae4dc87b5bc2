#pragma once

// PowerPC-side model: host memory with the two DMA buffers, the register
// programming sequences, the MRd completer and the interrupt service routine.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcie_dma/dma_endpoint.h"
#include "pcie_dma/register_file.h"
#include "pcie_dma/tlp.h"
#include "pcie_dma/trace.h"

namespace pcie_dma {

inline constexpr uint32_t kDmaBufferBytes = 262144;  // 2 Mbit

struct MemoryRegion {
  std::string name;
  uint32_t base = 0;
  std::vector<uint8_t> bytes;

  uint64_t end() const { return uint64_t{base} + bytes.size(); }
  bool contains(uint32_t addr, uint64_t len) const {
    return addr >= base && uint64_t{addr} + len <= end();
  }
};

// Sparse host memory: only declared regions are backed.
class HostMemory {
 public:
  void declare(std::string name, uint32_t base, uint32_t size);
  const MemoryRegion* find(uint32_t addr, uint64_t len) const;
  const MemoryRegion* region(std::string_view name) const;

  void write_dwords(uint32_t addr, std::span<const uint32_t> dwords);
  std::vector<uint32_t> read_dwords(uint32_t addr, uint32_t count) const;

 private:
  MemoryRegion* find_mut(uint32_t addr, uint64_t len);
  std::map<uint32_t, MemoryRegion> regions_;
};

struct HostConfig {
  uint32_t rx_base = 0x8000'0000;  // MWR destination
  uint32_t rx_bytes = kDmaBufferBytes;
  uint32_t tx_base = 0x8004'0000;  // MRD source
  uint32_t tx_bytes = kDmaBufferBytes;
  uint64_t cpl_latency_cycles = 64;
  uint64_t isr_latency_cycles = 32;
  bool split_completions = false;  // split CplD at 64-byte boundaries
  uint16_t completer_id = 0x0000;
  uint32_t pattern_seed = 0;
  bool suppress_int_ack = false;  // fault injection: ISR never acks
};

enum class IsrState : uint8_t { kIdle, kPending, kServicing };

struct HostStats {
  uint64_t msi_received = 0;
  uint64_t interrupts_mwr = 0;
  uint64_t interrupts_mrd = 0;
  uint64_t int_acks = 0;
  uint64_t mrd_stops = 0;
  uint64_t bytes_stored = 0;
  uint64_t bytes_verified = 0;
  uint64_t mismatches = 0;
  uint64_t completion_bytes = 0;
};

struct ProgramReport {
  uint32_t address;
  uint32_t len_dw;
  uint32_t count;
  std::vector<WriteReport> writes;
};

enum class TlpOutcome : uint8_t { kStored, kCompletionQueued, kInterruptPending };

struct TlpReport {
  TlpOutcome outcome;
  uint64_t bytes = 0;
  Cycle due = 0;  // release cycle for completions, service cycle for MSI
};

struct IsrReport {
  MsiCause cause;
  uint64_t mismatches = 0;
  bool acked = false;
  bool stopped = false;
};

struct PendingCompletion {
  Cycle release;
  Tlp cpl;
};

class HostDriver {
 public:
  explicit HostDriver(HostConfig config = {});

  // Stand-in for the OS driver registration: allocates both buffers and
  // installs the ISR. Idempotent.
  void attach();
  bool attached() const { return attached_; }

  ProgramReport program_mwr(RegisterFile& regs, uint32_t addr, uint32_t len_dw, uint32_t count,
                            EventLog* log = nullptr);
  ProgramReport program_mrd(RegisterFile& regs, uint32_t addr, uint32_t len_dw, uint32_t count,
                            uint32_t seed, EventLog* log = nullptr);

  TlpReport handle_tlp(const Tlp& tlp, Cycle now);

  // Releases at most one due completion, only when the completion interface
  // is free. Also advances the ISR latency countdown.
  std::optional<Tlp> tick_host(Cycle now, bool link_ready = true);

  IsrReport service_interrupt(RegisterFile& regs, EventLog* log = nullptr);

  IsrState isr_state() const { return isr_state_; }
  bool idle() const { return isr_state_ == IsrState::kIdle && completions_.empty(); }
  bool has_scheduled_work() const { return !idle(); }
  const std::deque<PendingCompletion>& pending_completions() const { return completions_; }

  const HostMemory& memory() const { return memory_; }
  HostMemory& memory() { return memory_; }
  const std::vector<uint32_t>& shadow() const { return shadow_; }
  const HostStats& stats() const { return stats_; }
  const HostConfig& config() const { return config_; }
  uint32_t mwr_seed() const { return mwr_seed_; }
  uint32_t mrd_seed() const { return mrd_seed_; }

  void set_suppress_int_ack(bool on) { config_.suppress_int_ack = on; }

 private:
  WriteReport pio_write(RegisterFile& regs, uint32_t offset, uint32_t value, EventLog* log);
  uint32_t pio_read(const RegisterFile& regs, uint32_t offset, EventLog* log);
  void check_range(std::string_view region, uint32_t addr, uint32_t len_dw, uint32_t count) const;
  void fill_pattern(uint32_t addr, uint64_t dwords, uint32_t seed);
  void queue_completions(const MemRead32& req, Cycle release);

  HostConfig config_;
  bool attached_ = false;
  HostMemory memory_;
  std::vector<uint32_t> shadow_;
  std::deque<PendingCompletion> completions_;
  IsrState isr_state_ = IsrState::kIdle;
  Cycle isr_due_ = 0;

  std::optional<DmaDescriptor> mwr_run_;
  std::optional<DmaDescriptor> mrd_run_;
  uint32_t mwr_seed_;
  uint32_t mrd_seed_;
  HostStats stats_;
};

}  // namespace pcie_dma
