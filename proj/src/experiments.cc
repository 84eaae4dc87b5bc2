#include "pcie_dma/experiments.h"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <limits>

#include <json.hpp>

namespace pcie_dma {
namespace {

// Runs body(i) for i in [0, n); exceptions are captured per index and the
// first one (in index order) is rethrown, so both policies fail identically.
template <class Body>
void for_each_point(size_t n, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<size_t>(i));
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<size_t>(i));
      } catch (...) {
        errors[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string point_trace(const System& sys, const RunResult& r, TraceFormat format) {
  return emit_trace(r.trace, format) + emit_snapshot(sys.regs().snapshot(), format);
}

void check_mwr_point(uint32_t pl, uint64_t data_bytes) {
  if (pl < 1 || pl > kMaxLengthDw) {
    throw SimError(ErrorCode::kPayloadOutOfRange, "payload " + std::to_string(pl) + " DWORDs");
  }
  const uint64_t tlp_bytes = 4ull * pl;
  if (data_bytes == 0 || data_bytes % tlp_bytes != 0) {
    throw SimError(ErrorCode::kIndivisibleDataSize,
                   std::to_string(data_bytes) + " bytes is not a multiple of " +
                       std::to_string(tlp_bytes));
  }
  if (data_bytes > std::numeric_limits<uint32_t>::max()) {
    throw SimError(ErrorCode::kInvalidConfig, "data size too large for 32-bit addressing");
  }
}

void check_mrd_point(uint64_t pl) {
  if (pl < 1 || pl > kMaxLengthDw) {
    throw SimError(ErrorCode::kPayloadOutOfRange, "payload " + std::to_string(pl) + " DWORDs");
  }
}

}  // namespace

std::vector<uint64_t> default_mwr_points() {
  std::vector<uint64_t> p;
  for (uint64_t d = 64; d <= (1u << 20); d *= 2) p.push_back(d);
  return p;
}

std::vector<uint64_t> default_mrd_points() { return {4, 8, 16, 32, 64, 128, 256, 512, 1024}; }

std::vector<uint64_t> default_theory_points() {
  return {1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
}

void validate_points(const std::vector<uint64_t>& points) {
  if (points.empty()) throw SimError(ErrorCode::kInvalidConfig, "no sweep points");
  for (size_t i = 1; i < points.size(); ++i) {
    if (points[i] <= points[i - 1]) {
      throw SimError(ErrorCode::kInvalidConfig, "sweep points must be strictly increasing");
    }
  }
}

MwrRow run_mwr_point(const SimConfig& config, uint32_t payload_len_dw, uint64_t data_bytes,
                     std::string* trace, TraceFormat format) {
  check_mwr_point(payload_len_dw, data_bytes);
  SimConfig c = config;
  c.trace = trace != nullptr;
  c.rx_bytes = static_cast<uint32_t>(std::max<uint64_t>(c.rx_bytes, data_bytes));
  System sys(c);
  const auto count = static_cast<uint32_t>(data_bytes / (4ull * payload_len_dw));
  sys.program_mwr(c.rx_base, payload_len_dw, count);
  const RunResult r = sys.run_until_idle();
  if (trace) *trace = point_trace(sys, r, format);
  return {data_bytes, r.mwr_perf, r.v_mwr_gbps, r.mismatches};
}

MrdRow run_mrd_point(const SimConfig& config, uint32_t payload_len_dw, std::string* trace,
                     TraceFormat format) {
  check_mrd_point(payload_len_dw);
  SimConfig c = config;
  c.trace = trace != nullptr;
  System sys(c);
  sys.program_mrd(c.effective_tx_base(), payload_len_dw, 1);
  const RunResult r = sys.run_until_idle();
  if (trace) *trace = point_trace(sys, r, format);
  const bool ok = r.mismatches == 0 && r.interrupts.mrd == 1 &&
                  sys.endpoint().rx_state() == RxState::kIdle &&
                  r.bytes_read == 4ull * payload_len_dw;
  const double v = measured_speed(4ull * payload_len_dw, r.mrd_perf, c.clock_period_ns).to_double();
  return {payload_len_dw, r.mrd_perf, v, ok};
}

SweepResult<MwrRow> run_mwr_sweep(const ExperimentSpec& spec, Execution exec) {
  validate_points(spec.points);
  for (uint64_t d : spec.points) check_mwr_point(spec.payload_len_dw, d);
  const size_t n = spec.points.size();
  SweepResult<MwrRow> out;
  out.rows.resize(n);
  if (spec.config.trace) out.traces.resize(n);
  for_each_point(n, exec, [&](size_t i) {
    out.rows[i] = run_mwr_point(spec.config, spec.payload_len_dw, spec.points[i],
                                spec.config.trace ? &out.traces[i] : nullptr, spec.trace_format);
  });
  return out;
}

SweepResult<MrdRow> run_mrd_sweep(const ExperimentSpec& spec, Execution exec) {
  validate_points(spec.points);
  for (uint64_t p : spec.points) check_mrd_point(p);
  const size_t n = spec.points.size();
  SweepResult<MrdRow> out;
  out.rows.resize(n);
  if (spec.config.trace) out.traces.resize(n);
  for_each_point(n, exec, [&](size_t i) {
    out.rows[i] = run_mrd_point(spec.config, static_cast<uint32_t>(spec.points[i]),
                                spec.config.trace ? &out.traces[i] : nullptr, spec.trace_format);
  });
  return out;
}

std::vector<GridPoint> run_counter_grid(const SimConfig& config, uint32_t max_pl,
                                        uint32_t max_count, Execution exec) {
  const size_t n = size_t{max_pl} * max_count;
  std::vector<GridPoint> out(n);
  SimConfig c = config;
  c.trace = false;
  for_each_point(n, exec, [&](size_t i) {
    const auto pl = static_cast<uint32_t>(i / max_count + 1);
    const auto count = static_cast<uint32_t>(i % max_count + 1);
    System sys(c);
    sys.program_mwr(c.rx_base, pl, count);
    const RunResult w = sys.run_until_idle();
    sys.program_mrd(c.effective_tx_base(), pl, count);
    const RunResult r = sys.run_until_idle();
    out[i] = {pl, count, w.mwr_perf, r.mrd_perf, w.mismatches + r.mismatches};
  });
  return out;
}

std::vector<TheoryRow> theory_table(const std::vector<uint64_t>& points, uint32_t beat_bytes) {
  std::vector<TheoryRow> rows;
  for (uint64_t p : points) {
    check_mrd_point(p);
    const auto pl = static_cast<uint32_t>(p);
    TheoryRow row{pl, dma_efficiency(pl), dma_theoretical_speed(pl),
                  mwr_cycle_model_speed(pl, beat_bytes), {}};
    row.delta = row.v_cycle_model_gbps - row.v_theory_gbps;
    rows.push_back(row);
  }
  return rows;
}

std::vector<LinkRow> link_table(const std::vector<uint64_t>& payload_bytes,
                                uint32_t overhead_bytes, uint32_t lanes) {
  std::vector<LinkRow> rows;
  for (uint64_t p : payload_bytes) {
    const auto pb = static_cast<uint32_t>(p);
    rows.push_back({pb, overhead_bytes, lanes,
                    link_throughput(LinkParams{pb, overhead_bytes, lanes, kGen1LaneMBps})});
  }
  return rows;
}

std::string format_sig5(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

std::string emit_report(const std::vector<MwrRow>& rows, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      j.push_back({{"data_bytes", r.data_bytes},
                   {"counter", r.counter},
                   {"v_gbps", r.v_gbps},
                   {"mismatches", r.mismatches}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = "data_bytes,counter,v_gbps,mismatches\n";
  for (const auto& r : rows) {
    out += std::to_string(r.data_bytes) + "," + std::to_string(r.counter) + "," +
           format_sig5(r.v_gbps) + "," + std::to_string(r.mismatches) + "\n";
  }
  return out;
}

std::string emit_report(const std::vector<MrdRow>& rows, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      j.push_back({{"pl_dw", r.pl_dw},
                   {"counter", r.counter},
                   {"v_gbps", r.v_gbps},
                   {"integrity_ok", r.integrity_ok}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = "pl_dw,counter,v_gbps,integrity_ok\n";
  for (const auto& r : rows) {
    out += std::to_string(r.pl_dw) + "," + std::to_string(r.counter) + "," +
           format_sig5(r.v_gbps) + "," + (r.integrity_ok ? "true" : "false") + "\n";
  }
  return out;
}

std::string emit_report(const std::vector<TheoryRow>& rows, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      j.push_back({{"PL_dw", r.pl_dw},
                   {"F", r.efficiency.to_double()},
                   {"V_theory_gbps", r.v_theory_gbps.to_double()},
                   {"V_cycle_model_gbps", r.v_cycle_model_gbps.to_double()},
                   {"delta", r.delta.to_double()},
                   {"F_exact", r.efficiency.str()},
                   {"V_theory_exact", r.v_theory_gbps.str()}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = "PL_dw,F,V_theory_gbps,V_cycle_model_gbps,delta\n";
  for (const auto& r : rows) {
    out += std::to_string(r.pl_dw) + "," + format_sig5(r.efficiency.to_double()) + "," +
           format_sig5(r.v_theory_gbps.to_double()) + "," +
           format_sig5(r.v_cycle_model_gbps.to_double()) + "," +
           format_sig5(r.delta.to_double()) + "\n";
  }
  return out;
}

std::string emit_report(const std::vector<LinkRow>& rows, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      j.push_back({{"payload_bytes", r.payload_bytes},
                   {"overhead_bytes", r.overhead_bytes},
                   {"lanes", r.lanes},
                   {"v_link_mbps", r.v_link_mbps.to_double()}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = "payload_bytes,overhead_bytes,lanes,v_link_mbps\n";
  for (const auto& r : rows) {
    out += std::to_string(r.payload_bytes) + "," + std::to_string(r.overhead_bytes) + "," +
           std::to_string(r.lanes) + "," + format_fixed(r.v_link_mbps.to_double(), 2) + "\n";
  }
  return out;
}

}  // namespace pcie_dma
