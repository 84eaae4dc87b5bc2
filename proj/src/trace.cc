#include "pcie_dma/trace.h"

#include <cstdio>

#include <json.hpp>

namespace pcie_dma {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

EventKind kind_for(const EventDetail& d) {
  return std::visit(Overloaded{
                        [](const StateChange&) { return EventKind::kStateChange; },
                        [](const Beat&) { return EventKind::kBeat; },
                        [](const MsiEvent&) { return EventKind::kMsi; },
                        [](const RegisterAccess&) { return EventKind::kRegisterAccess; },
                        [](const CounterPublish&) { return EventKind::kCounter; },
                    },
                    d);
}

std::string_view source_name(EventSource s) {
  switch (s) {
    case EventSource::kEndpoint: return "endpoint";
    case EventSource::kHost: return "host";
    case EventSource::kLink: return "link";
  }
  return "?";
}

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kStateChange: return "state-change";
    case EventKind::kBeat: return "beat";
    case EventKind::kMsi: return "msi";
    case EventKind::kRegisterAccess: return "register-access";
    case EventKind::kCounter: return "counter";
  }
  return "?";
}

std::string_view beat_kind_name(BeatKind k) {
  switch (k) {
    case BeatKind::kDescriptor: return "descriptor";
    case BeatKind::kData: return "data";
    case BeatKind::kHeader: return "header";
    case BeatKind::kDummy: return "dummy";
  }
  return "?";
}

std::string hex(uint32_t v, int width) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%0*x", width, v);
  return buf;
}

}  // namespace

std::string_view tx_state_name(uint8_t state) {
  static constexpr std::string_view kNames[] = {"Idle", "LoadDescriptor", "SendData",
                                                "WaitIntDone"};
  return state < 4 ? kNames[state] : "?";
}

std::string_view rx_state_name(uint8_t state) {
  static constexpr std::string_view kNames[] = {"Idle", "IssueMrd", "WaitStop", "GenMsi",
                                                "WaitIntDone"};
  return state < 5 ? kNames[state] : "?";
}

std::string_view cause_name(MsiCause cause) {
  return cause == MsiCause::kMwrDone ? "mwr_done" : "mrd_done";
}

void EventLog::record(EventSource src, EventDetail detail) {
  TraceEvent e{cycle_, src, kind_for(detail), std::move(detail)};
  if (keep_history_) history_.push_back(e);
  current_.push_back(std::move(e));
}

std::vector<std::pair<std::string, std::string>> event_fields(const TraceEvent& event) {
  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("cycle", std::to_string(event.cycle));
  f.emplace_back("src", source_name(event.source));
  f.emplace_back("kind", event_kind_name(event.kind));
  std::visit(
      Overloaded{
          [&](const StateChange& s) {
            const bool tx = s.fsm == Fsm::kTx;
            f.emplace_back("fsm", tx ? "tx" : "rx");
            f.emplace_back("from", tx ? tx_state_name(s.from) : rx_state_name(s.from));
            f.emplace_back("to", tx ? tx_state_name(s.to) : rx_state_name(s.to));
          },
          [&](const Beat& b) {
            f.emplace_back("detail", beat_kind_name(b.kind));
            f.emplace_back("iface", b.iface == Interface::kRri ? "rri" : "rci");
            if (b.kind == BeatKind::kDummy) return;
            f.emplace_back("tlp", kind_name(b.tlp));
            f.emplace_back("tag", hex(b.tag, 2));
            if (b.tlp != TlpKind::kCompletionWithData) f.emplace_back("addr", hex(b.address, 8));
            f.emplace_back("len", std::to_string(b.length_dw));
            f.emplace_back("beat", std::to_string(b.index + 1) + "/" + std::to_string(b.total));
          },
          [&](const MsiEvent& m) {
            f.emplace_back("vector", std::to_string(m.vector));
            f.emplace_back("cause", cause_name(m.cause));
          },
          [&](const RegisterAccess& r) {
            const RegisterInfo* info = find_register(r.offset);
            f.emplace_back("side", r.side == Side::kHost ? "host" : "endpoint");
            f.emplace_back("op", r.write ? "write" : "read");
            f.emplace_back("reg", info ? std::string(info->name) : "UNMAPPED");
            f.emplace_back("offset", hex(r.offset, 3));
            f.emplace_back("value", hex(r.value, 8));
            f.emplace_back("result", r.accepted ? "accepted" : "ignored");
          },
          [&](const CounterPublish& c) {
            f.emplace_back("name", c.id == CounterId::kMwrPerf ? "MWR_PERF" : "MRD_PERF");
            f.emplace_back("value", std::to_string(c.value));
          },
      },
      event.detail);
  return f;
}

std::string format_event(const TraceEvent& event) {
  std::string line;
  for (const auto& [k, v] : event_fields(event)) {
    if (!line.empty()) line += ' ';
    line += k;
    line += '=';
    line += v;
  }
  return line;
}

std::string emit_trace(const std::vector<TraceEvent>& events, TraceFormat format) {
  std::string out;
  for (const auto& e : events) {
    if (format == TraceFormat::kText) {
      out += format_event(e);
    } else {
      nlohmann::ordered_json j;
      for (const auto& [k, v] : event_fields(e)) {
        if (k == "cycle") {
          j[k] = e.cycle;
        } else {
          j[k] = v;
        }
      }
      out += j.dump();
    }
    out += '\n';
  }
  return out;
}

std::string emit_snapshot(const std::vector<RegisterEntry>& entries, TraceFormat format) {
  std::string out;
  for (const auto& r : entries) {
    if (format == TraceFormat::kText) {
      out += "snapshot offset=" + hex(r.offset, 3) + " name=" + std::string(r.name) +
             " value=" + hex(r.value, 8);
    } else {
      nlohmann::ordered_json j;
      j["kind"] = "snapshot";
      j["offset"] = hex(r.offset, 3);
      j["name"] = r.name;
      j["value"] = hex(r.value, 8);
      out += j.dump();
    }
    out += '\n';
  }
  return out;
}

}  // namespace pcie_dma
