#include "pcie_dma/dma_endpoint.h"

#include <string>

namespace pcie_dma {
namespace {

constexpr size_t kMaxRecordedMismatches = 64;

uint32_t status_bit(MsiCause cause) {
  return cause == MsiCause::kMwrDone ? bar0::kIntMwrDone : bar0::kIntMrdDone;
}

}  // namespace

uint32_t generate_pattern(uint32_t seed, uint32_t offset_dw) { return seed ^ offset_dw; }

std::vector<PatternMismatch> verify_pattern(uint32_t seed, uint32_t base_offset_dw,
                                            std::span<const uint32_t> payload) {
  std::vector<PatternMismatch> out;
  for (uint32_t i = 0; i < payload.size(); ++i) {
    const uint32_t want = generate_pattern(seed, base_offset_dw + i);
    if (payload[i] != want) out.push_back({i, want, payload[i]});
  }
  return out;
}

DmaEndpoint::DmaEndpoint(EndpointConfig config)
    : config_(config), tx_seed_(config.pattern_seed), rx_seed_(config.pattern_seed) {}

uint16_t DmaEndpoint::data_beats(uint32_t payload_len_dw) const {
  return static_cast<uint16_t>((4 * payload_len_dw + config_.beat_bytes - 1) /
                               config_.beat_bytes);
}

bool DmaEndpoint::has_autonomous_work() const {
  return tx_ == TxState::kLoadDescriptor || tx_ == TxState::kSendData ||
         rx_ == RxState::kGenMsi || (rx_ == RxState::kIssueMrd && !outstanding_tag_);
}

void DmaEndpoint::set_tx(TxState s, EventLog* log) {
  if (log) {
    log->record(EventSource::kEndpoint,
                StateChange{Fsm::kTx, static_cast<uint8_t>(tx_), static_cast<uint8_t>(s)});
  }
  tx_ = s;
}

void DmaEndpoint::set_rx(RxState s, EventLog* log) {
  if (log) {
    log->record(EventSource::kEndpoint,
                StateChange{Fsm::kRx, static_cast<uint8_t>(rx_), static_cast<uint8_t>(s)});
  }
  rx_ = s;
}

void DmaEndpoint::publish(RegisterFile& regs, CounterId id, uint64_t value, EventLog* log) {
  const uint32_t offset = id == CounterId::kMwrPerf ? bar0::kMwrPerf : bar0::kMrdPerf;
  regs.write32(offset, static_cast<uint32_t>(value), Side::kEndpoint);
  if (log) log->record(EventSource::kEndpoint, CounterPublish{id, value});
}

MsiMessage DmaEndpoint::raise_msi(RegisterFile& regs, MsiCause cause) {
  if (msi_pending_) {
    throw SimError(ErrorCode::kMsiAlreadyPending,
                   std::string("cannot raise ") + std::string(cause_name(cause)) + " while " +
                       std::string(cause_name(*msi_pending_)) + " is unacknowledged");
  }
  msi_pending_ = cause;
  regs.set_status_bits(status_bit(cause));
  return MsiMessage{0};
}

void DmaEndpoint::emit_msi(RegisterFile& regs, MsiCause cause, EndpointOutput& out,
                           EventLog* log) {
  out.msi = raise_msi(regs, cause);
  ++stats_.msi_sent;
  if (log) log->record(EventSource::kEndpoint, MsiEvent{out.msi->vector, cause});
}

DmaDescriptor DmaEndpoint::latch(const RegisterFile& regs, uint32_t addr_reg, uint32_t len_reg,
                                 uint32_t count_reg, RegisterEdge edge) {
  const uint32_t addr = regs.read32(addr_reg);
  const uint32_t len = regs.read32(len_reg);
  const uint32_t count = regs.read32(count_reg);
  if (count == 0 || len == 0 || len > kMaxLengthDw || addr % 4 != 0) {
    throw SimError(ErrorCode::kDescriptorInvalid,
                   std::string(edge_name(edge)) + " with addr=" + std::to_string(addr) +
                       " len=" + std::to_string(len) + " count=" + std::to_string(count));
  }
  DmaDescriptor d;
  d.address = addr;
  d.payload_len_dw = static_cast<uint16_t>(len);
  d.count = count;
  d.write_pointer = addr;
  return d;
}

void DmaEndpoint::handle_acks(RegisterFile& regs, EventLog* log) {
  // MRD_STOP first so that WaitStop always lasts at least one cycle.
  if (regs.edge_pending(RegisterEdge::kMrdStop)) {
    if (rx_ == RxState::kWaitStop) {
      regs.consume_edge(RegisterEdge::kMrdStop);
      rx_seed_ = next_pattern_seed(rx_seed_);
      set_rx(RxState::kIdle, log);
    } else if (rx_ == RxState::kIdle) {
      regs.consume_edge(RegisterEdge::kMrdStop);  // stray stop
    }
  }
  if (regs.edge_pending(RegisterEdge::kIntAck)) {
    if (tx_ == TxState::kWaitIntDone && msi_pending_ == MsiCause::kMwrDone) {
      regs.consume_edge(RegisterEdge::kIntAck);
      regs.clear_status_bits(bar0::kIntMwrDone);
      msi_pending_.reset();
      tx_seed_ = next_pattern_seed(tx_seed_);
      set_tx(TxState::kIdle, log);
    } else if (rx_ == RxState::kWaitIntDone && msi_pending_ == MsiCause::kMrdDone) {
      regs.consume_edge(RegisterEdge::kIntAck);
      regs.clear_status_bits(bar0::kIntMrdDone);
      msi_pending_.reset();
      set_rx(RxState::kWaitStop, log);
    } else if (tx_ != TxState::kWaitIntDone && rx_ != RxState::kWaitIntDone) {
      regs.consume_edge(RegisterEdge::kIntAck);  // stray ack
    }
  }
}

bool DmaEndpoint::tick_tx(RegisterFile& regs, Cycle now, EndpointOutput& out, EventLog* log) {
  if (tx_ == TxState::kIdle) {
    if (!regs.edge_pending(RegisterEdge::kMwrStart)) return false;
    regs.consume_edge(RegisterEdge::kMwrStart);
    tx_desc_ = latch(regs, bar0::kMwrAddr, bar0::kMwrLen, bar0::kMwrCount,
                     RegisterEdge::kMwrStart);
    set_tx(TxState::kLoadDescriptor, log);
    mwr_counter_ = 0;
    tx_counting_ = true;
    tx_done_ = false;
    tx_beat_ = 0;
    tx_gap_ = false;
  }
  if (tx_ == TxState::kWaitIntDone) return false;

  if (tx_counting_) ++mwr_counter_;
  if (tx_done_) {
    // mwr_done already asserted; waiting for the interrupt controller.
    if (!msi_pending_) {
      emit_msi(regs, MsiCause::kMwrDone, out, log);
      tx_done_ = false;
      set_tx(TxState::kWaitIntDone, log);
    }
    return false;
  }
  if (tx_gap_) {
    tx_gap_ = false;
    return false;
  }

  const uint16_t len = tx_desc_.payload_len_dw;
  const uint16_t total = static_cast<uint16_t>(1 + data_beats(len));
  Beat beat;
  beat.iface = Interface::kRri;
  beat.tlp = TlpKind::kMemWrite32;
  beat.address = tx_desc_.write_pointer;
  beat.length_dw = len;
  beat.index = tx_beat_;
  beat.total = total;

  if (tx_beat_ == 0) {
    if (data_ready_ && !data_ready_(now)) return false;
    std::vector<uint32_t> payload(len);
    const uint32_t base = tx_desc_.cursor * len;
    for (uint32_t i = 0; i < len; ++i) payload[i] = generate_pattern(tx_seed_, base + i);
    tx_tlp_ = make_mem_write(tx_desc_.write_pointer, std::move(payload), config_.requester_id);
    beat.kind = BeatKind::kDescriptor;
    if (log) log->record(EventSource::kEndpoint, beat);
    tx_beat_ = 1;
    if (tx_ == TxState::kLoadDescriptor) set_tx(TxState::kSendData, log);
    return true;
  }

  beat.kind = BeatKind::kData;
  if (log) log->record(EventSource::kEndpoint, beat);
  if (tx_beat_ + 1 < total) {
    ++tx_beat_;
    return true;
  }

  out.tlp = std::move(*tx_tlp_);
  tx_tlp_.reset();
  ++stats_.tlps_sent;
  ++tx_desc_.cursor;
  tx_desc_.write_pointer += 4u * len;
  tx_beat_ = 0;
  if (tx_desc_.cursor < tx_desc_.count) {
    tx_gap_ = true;
    return true;
  }
  tx_counting_ = false;
  last_mwr_bytes_ = tx_desc_.data_bytes();
  publish(regs, CounterId::kMwrPerf, mwr_counter_, log);
  if (msi_pending_) {
    tx_done_ = true;
  } else {
    emit_msi(regs, MsiCause::kMwrDone, out, log);
    set_tx(TxState::kWaitIntDone, log);
  }
  return true;
}

bool DmaEndpoint::tick_rx(RegisterFile& regs, const InboundBeat* rx_in, bool port_busy,
                          EndpointOutput& out, EventLog* log) {
  const RxState at_start = rx_;

  if (rx_in != nullptr) {
    const auto* cpl = std::get_if<CompletionWithData>(rx_in->tlp);
    if (cpl == nullptr) {
      throw SimError(ErrorCode::kProtocolViolation,
                     "unexpected " + std::string(kind_name(kind_of(*rx_in->tlp))) +
                         " on the completion interface");
    }
    if (rx_ != RxState::kIssueMrd || !outstanding_tag_ || cpl->header.tag != *outstanding_tag_) {
      throw SimError(ErrorCode::kProtocolViolation,
                     "completion with unknown tag " + std::to_string(cpl->header.tag));
    }
    ++mrd_counter_;
    if (rx_in->last()) {
      if (cpl->header.status != CplStatus::kSuccessful) {
        throw SimError(ErrorCode::kProtocolViolation, "unsuccessful completion status");
      }
      const uint32_t len = rx_desc_.payload_len_dw;
      if (rx_received_dw_ + cpl->payload.size() > len) {
        throw SimError(ErrorCode::kProtocolViolation, "completion exceeds requested length");
      }
      const uint32_t base = rx_desc_.cursor * len + rx_received_dw_;
      auto bad = verify_pattern(rx_seed_, base, cpl->payload);
      stats_.rx_dwords_checked += cpl->payload.size();
      stats_.rx_mismatch_count += bad.size();
      for (auto& m : bad) {
        if (rx_mismatches_.size() >= kMaxRecordedMismatches) break;
        m.index += base;
        rx_mismatches_.push_back(m);
      }
      rx_received_dw_ += static_cast<uint32_t>(cpl->payload.size());
      stats_.rx_bytes += 4 * cpl->payload.size();
      if (rx_received_dw_ == len) {
        outstanding_tag_.reset();
        rx_received_dw_ = 0;
        ++rx_desc_.cursor;
        rx_desc_.write_pointer += 4u * len;
        if (rx_desc_.cursor == rx_desc_.count) {
          last_mrd_bytes_ = rx_desc_.data_bytes();
          publish(regs, CounterId::kMrdPerf, mrd_counter_, log);
          set_rx(RxState::kGenMsi, log);
        }
      }
    }
  }

  switch (at_start) {
    case RxState::kIdle:
      if (!regs.edge_pending(RegisterEdge::kMrdStart)) return false;
      regs.consume_edge(RegisterEdge::kMrdStart);
      rx_desc_ = latch(regs, bar0::kMrdAddr, bar0::kMrdLen, bar0::kMrdCount,
                       RegisterEdge::kMrdStart);
      set_rx(RxState::kIssueMrd, log);
      mrd_counter_ = 0;
      outstanding_tag_.reset();
      rx_received_dw_ = 0;
      break;
    case RxState::kGenMsi:
      if (!msi_pending_) {
        emit_msi(regs, MsiCause::kMrdDone, out, log);
        set_rx(RxState::kWaitIntDone, log);
      }
      return false;
    case RxState::kIssueMrd:
      break;
    default:
      return false;
  }

  if (rx_ != RxState::kIssueMrd || outstanding_tag_ || port_busy ||
      rx_desc_.cursor >= rx_desc_.count) {
    return false;
  }
  const uint8_t tag = next_tag_;
  next_tag_ = static_cast<uint8_t>((next_tag_ + 1) % 32);
  outstanding_tag_ = tag;
  out.tlp = make_mem_read(rx_desc_.write_pointer, rx_desc_.payload_len_dw,
                          config_.requester_id, tag);
  ++stats_.tlps_sent;
  if (log) {
    Beat beat;
    beat.iface = Interface::kRri;
    beat.kind = BeatKind::kDescriptor;
    beat.tlp = TlpKind::kMemRead32;
    beat.tag = tag;
    beat.address = rx_desc_.write_pointer;
    beat.length_dw = rx_desc_.payload_len_dw;
    beat.index = 0;
    beat.total = 1;
    log->record(EventSource::kEndpoint, beat);
  }
  return true;
}

EndpointOutput DmaEndpoint::tick(RegisterFile& regs, const InboundBeat* rx_in, Cycle now,
                                 EventLog* log) {
  EndpointOutput out;
  handle_acks(regs, log);
  const bool tx_gap = tx_gap_ && !tx_done_ &&
                      (tx_ == TxState::kSendData || tx_ == TxState::kLoadDescriptor);
  const bool tx_used = tick_tx(regs, now, out, log);
  const bool rx_used = tick_rx(regs, rx_in, tx_used, out, log);
  if (tx_gap && !rx_used && log) {
    Beat dummy;
    dummy.kind = BeatKind::kDummy;
    log->record(EventSource::kEndpoint, dummy);
  }
  return out;
}

}  // namespace pcie_dma
