#include "pcie_dma/host_driver.h"

#include <algorithm>
#include <cstdio>
#include <utility>

namespace pcie_dma {
namespace {

std::string hex32(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%08llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void HostMemory::declare(std::string name, uint32_t base, uint32_t size) {
  if (base % 4 != 0 || size % 4 != 0 || size == 0) {
    throw SimError(ErrorCode::kInvalidConfig, "region " + name + " must be DWORD-aligned");
  }
  const uint64_t end = uint64_t{base} + size;
  if (end > (uint64_t{1} << 32)) {
    throw SimError(ErrorCode::kInvalidConfig, "region " + name + " exceeds 32-bit space");
  }
  for (const auto& [b, r] : regions_) {
    if (base < r.end() && b < end) {
      throw SimError(ErrorCode::kInvalidConfig, "region " + name + " overlaps " + r.name);
    }
  }
  regions_.emplace(base, MemoryRegion{std::move(name), base, std::vector<uint8_t>(size)});
}

const MemoryRegion* HostMemory::find(uint32_t addr, uint64_t len) const {
  auto it = regions_.upper_bound(addr);
  if (it == regions_.begin()) return nullptr;
  --it;
  return it->second.contains(addr, len) ? &it->second : nullptr;
}

MemoryRegion* HostMemory::find_mut(uint32_t addr, uint64_t len) {
  return const_cast<MemoryRegion*>(std::as_const(*this).find(addr, len));
}

const MemoryRegion* HostMemory::region(std::string_view name) const {
  for (const auto& [b, r] : regions_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

void HostMemory::write_dwords(uint32_t addr, std::span<const uint32_t> dwords) {
  MemoryRegion* r = find_mut(addr, 4 * uint64_t{dwords.size()});
  if (r == nullptr) {
    throw SimError(ErrorCode::kAddressUnmapped, "write at " + hex32(addr));
  }
  uint8_t* p = r->bytes.data() + (addr - r->base);
  for (uint32_t dw : dwords) {
    *p++ = static_cast<uint8_t>(dw >> 24);
    *p++ = static_cast<uint8_t>(dw >> 16);
    *p++ = static_cast<uint8_t>(dw >> 8);
    *p++ = static_cast<uint8_t>(dw);
  }
}

std::vector<uint32_t> HostMemory::read_dwords(uint32_t addr, uint32_t count) const {
  const MemoryRegion* r = find(addr, 4 * uint64_t{count});
  if (r == nullptr) {
    throw SimError(ErrorCode::kAddressUnmapped, "read at " + hex32(addr));
  }
  std::vector<uint32_t> out(count);
  const uint8_t* p = r->bytes.data() + (addr - r->base);
  for (auto& dw : out) {
    dw = (uint32_t{p[0]} << 24) | (uint32_t{p[1]} << 16) | (uint32_t{p[2]} << 8) | p[3];
    p += 4;
  }
  return out;
}

HostDriver::HostDriver(HostConfig config)
    : config_(config), mwr_seed_(config.pattern_seed), mrd_seed_(config.pattern_seed) {}

void HostDriver::attach() {
  if (attached_) return;
  memory_.declare("rx_buffer", config_.rx_base, config_.rx_bytes);
  memory_.declare("tx_buffer", config_.tx_base, config_.tx_bytes);
  attached_ = true;
}

WriteReport HostDriver::pio_write(RegisterFile& regs, uint32_t offset, uint32_t value,
                                  EventLog* log) {
  WriteReport r = regs.write32(offset, value, Side::kHost);
  if (log) {
    log->record(EventSource::kHost, RegisterAccess{Side::kHost, true, offset, value, r.accepted});
  }
  return r;
}

uint32_t HostDriver::pio_read(const RegisterFile& regs, uint32_t offset, EventLog* log) {
  const uint32_t v = regs.read32(offset);
  if (log) log->record(EventSource::kHost, RegisterAccess{Side::kHost, false, offset, v, true});
  return v;
}

void HostDriver::check_range(std::string_view region, uint32_t addr, uint32_t len_dw,
                             uint32_t count) const {
  if (!attached_) throw SimError(ErrorCode::kInvalidConfig, "driver not attached");
  if (count == 0 || len_dw == 0 || len_dw > kMaxLengthDw || addr % 4 != 0) {
    throw SimError(ErrorCode::kBadDescriptor,
                   "len_dw=" + std::to_string(len_dw) + " count=" + std::to_string(count) +
                       " addr=" + hex32(addr));
  }
  const MemoryRegion* r = memory_.region(region);
  const uint64_t bytes = 4ull * len_dw * count;
  if (r == nullptr || !r->contains(addr, bytes)) {
    throw SimError(ErrorCode::kRangeOutsideBuffer,
                   std::to_string(bytes) + " bytes at " + hex32(addr) + " outside " +
                       std::string(region));
  }
}

void HostDriver::fill_pattern(uint32_t addr, uint64_t dwords, uint32_t seed) {
  std::vector<uint32_t> data(dwords);
  for (uint32_t i = 0; i < dwords; ++i) data[i] = generate_pattern(seed, i);
  memory_.write_dwords(addr, data);
}

ProgramReport HostDriver::program_mwr(RegisterFile& regs, uint32_t addr, uint32_t len_dw,
                                      uint32_t count, EventLog* log) {
  check_range("rx_buffer", addr, len_dw, count);
  DmaDescriptor run;
  run.address = addr;
  run.payload_len_dw = static_cast<uint16_t>(len_dw);
  run.count = count;
  run.write_pointer = addr;
  mwr_run_ = run;

  ProgramReport report{addr, len_dw, count, {}};
  report.writes.push_back(pio_write(regs, bar0::kMwrAddr, addr, log));
  report.writes.push_back(pio_write(regs, bar0::kMwrLen, len_dw, log));
  report.writes.push_back(pio_write(regs, bar0::kMwrCount, count, log));
  report.writes.push_back(pio_write(regs, bar0::kInit, 1, log));
  report.writes.push_back(pio_write(regs, bar0::kMwrStart, 1, log));
  return report;
}

ProgramReport HostDriver::program_mrd(RegisterFile& regs, uint32_t addr, uint32_t len_dw,
                                      uint32_t count, uint32_t seed, EventLog* log) {
  check_range("tx_buffer", addr, len_dw, count);
  DmaDescriptor run;
  run.address = addr;
  run.payload_len_dw = static_cast<uint16_t>(len_dw);
  run.count = count;
  run.write_pointer = addr;
  mrd_run_ = run;
  mrd_seed_ = seed;
  fill_pattern(addr, run.data_bytes() / 4, seed);

  ProgramReport report{addr, len_dw, count, {}};
  report.writes.push_back(pio_write(regs, bar0::kMrdAddr, addr, log));
  report.writes.push_back(pio_write(regs, bar0::kMrdLen, len_dw, log));
  report.writes.push_back(pio_write(regs, bar0::kMrdCount, count, log));
  report.writes.push_back(pio_write(regs, bar0::kInit, 1, log));
  report.writes.push_back(pio_write(regs, bar0::kMrdStart, 1, log));
  return report;
}

void HostDriver::queue_completions(const MemRead32& req, Cycle release) {
  const uint32_t addr = req.header.address;
  const uint32_t total_bytes = 4u * req.header.length_dw;
  auto make = [&](uint32_t at, uint32_t bytes, uint32_t remaining) {
    CompletionWithData cpl;
    cpl.header.completer_id = config_.completer_id;
    cpl.header.status = CplStatus::kSuccessful;
    cpl.header.byte_count = static_cast<uint16_t>(remaining);
    cpl.header.requester_id = req.header.requester_id;
    cpl.header.tag = req.header.tag;
    cpl.header.lower_address = static_cast<uint8_t>(at & 0x7F);
    cpl.payload = memory_.read_dwords(at, bytes / 4);
    stats_.completion_bytes += bytes;
    completions_.push_back({release, std::move(cpl)});
  };
  if (!config_.split_completions) {
    make(addr, total_bytes, total_bytes);
    return;
  }
  constexpr uint32_t kBoundary = 64;
  uint32_t at = addr;
  uint32_t remaining = total_bytes;
  while (remaining > 0) {
    const uint32_t chunk = std::min(remaining, kBoundary - at % kBoundary);
    make(at, chunk, remaining);
    at += chunk;
    remaining -= chunk;
  }
}

TlpReport HostDriver::handle_tlp(const Tlp& tlp, Cycle now) {
  if (const auto* w = std::get_if<MemWrite32>(&tlp)) {
    memory_.write_dwords(w->header.address, w->payload);
    stats_.bytes_stored += 4 * w->payload.size();
    return {TlpOutcome::kStored, 4 * w->payload.size(), now};
  }
  if (const auto* r = std::get_if<MemRead32>(&tlp)) {
    const uint64_t bytes = 4ull * r->header.length_dw;
    if (memory_.find(r->header.address, bytes) == nullptr) {
      throw SimError(ErrorCode::kAddressUnmapped, "read at " + hex32(r->header.address));
    }
    const Cycle release = now + config_.cpl_latency_cycles;
    queue_completions(*r, release);
    return {TlpOutcome::kCompletionQueued, bytes, release};
  }
  if (std::holds_alternative<MsiMessage>(tlp)) {
    ++stats_.msi_received;
    if (isr_state_ == IsrState::kIdle) {
      isr_state_ = IsrState::kPending;
      isr_due_ = now + config_.isr_latency_cycles;
    }
    return {TlpOutcome::kInterruptPending, 0, isr_due_};
  }
  throw SimError(ErrorCode::kUnexpectedTlpType,
                 "host received " + std::string(kind_name(kind_of(tlp))));
}

std::optional<Tlp> HostDriver::tick_host(Cycle now, bool link_ready) {
  if (isr_state_ == IsrState::kPending && now >= isr_due_) isr_state_ = IsrState::kServicing;
  if (!link_ready || completions_.empty() || completions_.front().release > now) {
    return std::nullopt;
  }
  Tlp out = std::move(completions_.front().cpl);
  completions_.pop_front();
  return out;
}

IsrReport HostDriver::service_interrupt(RegisterFile& regs, EventLog* log) {
  if (isr_state_ != IsrState::kServicing) {
    throw SimError(ErrorCode::kSpuriousInterrupt, "ISR invoked without a delivered MSI");
  }
  isr_state_ = IsrState::kIdle;
  const uint32_t status = pio_read(regs, bar0::kIntStatus, log);
  IsrReport report{};
  if (status & bar0::kIntMwrDone) {
    report.cause = MsiCause::kMwrDone;
    ++stats_.interrupts_mwr;
    if (mwr_run_) {
      shadow_ = memory_.read_dwords(mwr_run_->address,
                                    static_cast<uint32_t>(mwr_run_->data_bytes() / 4));
      report.mismatches = verify_pattern(mwr_seed_, 0, shadow_).size();
      stats_.mismatches += report.mismatches;
      stats_.bytes_verified += mwr_run_->data_bytes();
    }
    mwr_seed_ = next_pattern_seed(mwr_seed_);
    if (!config_.suppress_int_ack) {
      pio_write(regs, bar0::kIntAck, 1, log);
      ++stats_.int_acks;
      report.acked = true;
    }
    return report;
  }
  if (status & bar0::kIntMrdDone) {
    report.cause = MsiCause::kMrdDone;
    ++stats_.interrupts_mrd;
    mrd_seed_ = next_pattern_seed(mrd_seed_);
    if (mrd_run_) fill_pattern(mrd_run_->address, mrd_run_->data_bytes() / 4, mrd_seed_);
    if (!config_.suppress_int_ack) {
      pio_write(regs, bar0::kIntAck, 1, log);
      ++stats_.int_acks;
      report.acked = true;
      pio_write(regs, bar0::kMrdStop, 1, log);
      ++stats_.mrd_stops;
      report.stopped = true;
    }
    return report;
  }
  throw SimError(ErrorCode::kSpuriousInterrupt, "INT_STATUS is 0");
}

}  // namespace pcie_dma
