#pragma once

// Per-cycle event records. Events carry plain fields only; text and JSONL
// rendering happens in emit_trace so that untraced runs stay allocation-free.
//
// Text format, one event per line:
//   cycle=<n> src=<endpoint|host|link> kind=<kind> <key=value ...>

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pcie_dma/register_file.h"
#include "pcie_dma/tlp.h"

namespace pcie_dma {

using Cycle = uint64_t;

enum class EventSource : uint8_t { kEndpoint, kHost, kLink };
enum class EventKind : uint8_t { kStateChange, kBeat, kMsi, kRegisterAccess, kCounter };

enum class Fsm : uint8_t { kTx, kRx };

// User-side AXI4-Stream groups. RRI carries endpoint requests to the host,
// RCI carries host completions back.
enum class Interface : uint8_t { kRri, kRci };

enum class BeatKind : uint8_t { kDescriptor, kData, kHeader, kDummy };

enum class MsiCause : uint8_t { kMwrDone, kMrdDone };

enum class CounterId : uint8_t { kMwrPerf, kMrdPerf };

struct StateChange {
  Fsm fsm;
  uint8_t from;
  uint8_t to;
};

struct Beat {
  Interface iface = Interface::kRri;
  BeatKind kind = BeatKind::kDummy;
  TlpKind tlp = TlpKind::kMemWrite32;
  uint8_t tag = 0;
  uint32_t address = 0;
  uint16_t length_dw = 0;
  uint16_t index = 0;  // beat position within the TLP
  uint16_t total = 0;  // beats the TLP occupies
};

struct MsiEvent {
  uint8_t vector;
  MsiCause cause;
};

struct RegisterAccess {
  Side side;
  bool write;
  uint32_t offset;
  uint32_t value;
  bool accepted;
};

struct CounterPublish {
  CounterId id;
  uint64_t value;
};

using EventDetail = std::variant<StateChange, Beat, MsiEvent, RegisterAccess, CounterPublish>;

struct TraceEvent {
  Cycle cycle;
  EventSource source;
  EventKind kind;
  EventDetail detail;
};

std::string_view tx_state_name(uint8_t state);
std::string_view rx_state_name(uint8_t state);
std::string_view cause_name(MsiCause cause);

// Collects the events of the current cycle; when keep_history is set, also
// retains every event of the run.
class EventLog {
 public:
  explicit EventLog(bool keep_history = false) : keep_history_(keep_history) {}

  void begin_cycle(Cycle cycle) {
    cycle_ = cycle;
    current_.clear();
  }
  Cycle cycle() const { return cycle_; }

  void record(EventSource src, EventDetail detail);

  const std::vector<TraceEvent>& current() const { return current_; }
  const std::vector<TraceEvent>& history() const { return history_; }
  void clear_history() { history_.clear(); }
  bool keeps_history() const { return keep_history_; }

 private:
  bool keep_history_;
  Cycle cycle_ = 0;
  std::vector<TraceEvent> current_;
  std::vector<TraceEvent> history_;
};

enum class TraceFormat { kText, kJsonl };

// Ordered key/value fields of one event; both formats render these.
std::vector<std::pair<std::string, std::string>> event_fields(const TraceEvent& event);

std::string format_event(const TraceEvent& event);
std::string emit_trace(const std::vector<TraceEvent>& events, TraceFormat format);

// Register snapshot lines appended to traces.
std::string emit_snapshot(const std::vector<RegisterEntry>& entries, TraceFormat format);

}  // namespace pcie_dma
