#include "pcie_dma/system.h"

#include <json.hpp>

#include "pcie_dma/perf_model.h"

namespace pcie_dma {
namespace {

SimConfig checked(const SimConfig& c) {
  if (c.max_cycles == 0) throw SimError(ErrorCode::kInvalidConfig, "max_cycles must be > 0");
  if (c.generation != 1) throw SimError(ErrorCode::kInvalidConfig, "only Gen1 is modelled");
  if (c.lanes == 0) throw SimError(ErrorCode::kInvalidConfig, "lanes must be >= 1");
  if (c.clock_period_ns == 0) {
    throw SimError(ErrorCode::kInvalidConfig, "clock_period_ns must be > 0");
  }
  if (c.beat_bytes != 16 && c.beat_bytes != 32 && c.beat_bytes != 64) {
    throw SimError(ErrorCode::kInvalidConfig, "beat_bytes must be 16, 32 or 64");
  }
  return c;
}

EndpointConfig endpoint_config(const SimConfig& c) {
  EndpointConfig e;
  e.beat_bytes = c.beat_bytes;
  e.pattern_seed = c.seed;
  return e;
}

HostConfig host_config(const SimConfig& c) {
  HostConfig h;
  h.rx_base = c.rx_base;
  h.rx_bytes = c.rx_bytes;
  h.tx_base = c.effective_tx_base();
  h.tx_bytes = c.tx_bytes;
  h.cpl_latency_cycles = c.cpl_latency_cycles;
  h.isr_latency_cycles = c.isr_latency_cycles;
  h.split_completions = c.split_completions;
  h.pattern_seed = c.seed;
  return h;
}

std::string_view isr_name(IsrState s) {
  switch (s) {
    case IsrState::kIdle: return "Idle";
    case IsrState::kPending: return "Pending";
    case IsrState::kServicing: return "Servicing";
  }
  return "?";
}

}  // namespace

System::System(const SimConfig& config)
    : config_(checked(config)),
      endpoint_(endpoint_config(config_)),
      host_(host_config(config_)),
      log_(config_.trace) {
  host_.attach();
}

System build_system(const SimConfig& config) { return System(config); }

ProgramReport System::program_mwr(uint32_t addr, uint32_t len_dw, uint32_t count) {
  log_.begin_cycle(cycle_);
  return host_.program_mwr(regs_, addr, len_dw, count, &log_);
}

ProgramReport System::program_mrd(uint32_t addr, uint32_t len_dw, uint32_t count) {
  log_.begin_cycle(cycle_);
  return host_.program_mrd(regs_, addr, len_dw, count, host_.mrd_seed(), &log_);
}

void System::deliver(const Tlp& tlp) {
  if (config_.trace) tlp_log_.push_back(describe(tlp));
}

const std::vector<TraceEvent>& System::step() {
  if (halted_ || cycle_ >= config_.max_cycles) {
    halted_ = true;
    throw SimError(ErrorCode::kHalted,
                   "cycle bound " + std::to_string(config_.max_cycles) + " reached; " +
                       describe_state());
  }
  log_.begin_cycle(cycle_);

  // Phase 1: host.
  if (auto cpl = host_.tick_host(cycle_, !inbound_.has_value())) {
    const auto& c = std::get<CompletionWithData>(*cpl);
    const auto beats = static_cast<uint16_t>(1 + payload_beats(static_cast<uint32_t>(c.payload.size()),
                                                               config_.beat_bytes));
    deliver(*cpl);
    inbound_ = InboundStream{std::move(*cpl), 0, beats};
  }
  if (host_.isr_state() == IsrState::kServicing) host_.service_interrupt(regs_, &log_);

  // Phase 2: endpoint, with the current completion beat.
  InboundBeat beat;
  const InboundBeat* rx = nullptr;
  if (inbound_) {
    beat = InboundBeat{&inbound_->tlp, inbound_->next, inbound_->total};
    rx = &beat;
    const auto& c = std::get<CompletionWithData>(inbound_->tlp);
    Beat b;
    b.iface = Interface::kRci;
    b.kind = beat.index == 0 ? BeatKind::kHeader : BeatKind::kData;
    b.tlp = TlpKind::kCompletionWithData;
    b.tag = c.header.tag;
    b.length_dw = static_cast<uint16_t>(c.payload.size());
    b.index = beat.index;
    b.total = beat.total;
    log_.record(EventSource::kLink, b);
  }
  EndpointOutput out = endpoint_.tick(regs_, rx, cycle_, &log_);
  if (inbound_ && ++inbound_->next == inbound_->total) inbound_.reset();

  // Phase 3: link delivery to the host.
  if (out.tlp) {
    deliver(*out.tlp);
    host_.handle_tlp(*out.tlp, cycle_);
  }
  if (out.msi) {
    Tlp msi = *out.msi;
    deliver(msi);
    host_.handle_tlp(msi, cycle_);
  }
  ++cycle_;
  return log_.current();
}

bool System::idle() const {
  return endpoint_.idle() && host_.idle() && !inbound_ && !regs_.any_edge_pending();
}

bool System::stalled() const {
  return !idle() && !endpoint_.has_autonomous_work() && !host_.has_scheduled_work() &&
         !inbound_ && !regs_.any_edge_pending();
}

std::string System::describe_state() const {
  std::string s = "tx=" + std::string(tx_state_name(static_cast<uint8_t>(endpoint_.tx_state())));
  s += " rx=" + std::string(rx_state_name(static_cast<uint8_t>(endpoint_.rx_state())));
  s += " msi_pending=" + std::to_string(endpoint_.msi_pending());
  s += " host_isr=" + std::string(isr_name(host_.isr_state()));
  s += " queued_cpl=" + std::to_string(host_.pending_completions().size());
  s += " cycle=" + std::to_string(cycle_);
  return s;
}

RunResult System::run_until_idle() {
  const Cycle start = cycle_;
  const size_t trace_start = log_.history().size();
  const HostStats host0 = host_.stats();
  const EndpointStats ep0 = endpoint_.stats();

  while (!idle()) {
    if (stalled()) {
      throw SimError(ErrorCode::kDeadlockDetected, "no progress possible: " + describe_state());
    }
    if (cycle_ >= config_.max_cycles) {
      halted_ = true;
      throw SimError(ErrorCode::kDeadlockDetected,
                     "max_cycles reached with work pending: " + describe_state());
    }
    step();
  }

  const HostStats& host1 = host_.stats();
  const EndpointStats& ep1 = endpoint_.stats();
  RunResult r;
  r.total_cycles = cycle_ - start;
  r.mwr_perf = regs_.read32(bar0::kMwrPerf);
  r.mrd_perf = regs_.read32(bar0::kMrdPerf);
  r.bytes_written = host1.bytes_stored - host0.bytes_stored;
  r.bytes_read = ep1.rx_bytes - ep0.rx_bytes;
  if (r.mwr_perf > 0) {
    r.v_mwr_gbps =
        measured_speed(endpoint_.last_mwr_bytes(), r.mwr_perf, config_.clock_period_ns).to_double();
  }
  if (r.mrd_perf > 0) {
    r.v_mrd_gbps =
        measured_speed(endpoint_.last_mrd_bytes(), r.mrd_perf, config_.clock_period_ns).to_double();
  }
  r.interrupts.mwr = host1.interrupts_mwr - host0.interrupts_mwr;
  r.interrupts.mrd = host1.interrupts_mrd - host0.interrupts_mrd;
  r.mismatches = (host1.mismatches - host0.mismatches) +
                 (ep1.rx_mismatch_count - ep0.rx_mismatch_count);
  r.conformant = config_.paper_conformant();
  if (config_.trace) {
    r.trace.assign(log_.history().begin() + static_cast<std::ptrdiff_t>(trace_start),
                   log_.history().end());
  }
  return r;
}

std::string run_result_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["total_cycles"] = r.total_cycles;
  j["mwr_perf"] = r.mwr_perf;
  j["mrd_perf"] = r.mrd_perf;
  j["bytes_written"] = r.bytes_written;
  j["bytes_read"] = r.bytes_read;
  j["v_mwr_gbps"] = r.v_mwr_gbps;
  j["v_mrd_gbps"] = r.v_mrd_gbps;
  j["interrupts"] = {{"mwr", r.interrupts.mwr}, {"mrd", r.interrupts.mrd}};
  j["mismatches"] = r.mismatches;
  j["conformant"] = r.conformant;
  return j.dump();
}

}  // namespace pcie_dma
