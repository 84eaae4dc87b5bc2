// Command-line front end: MWR / MRD throughput sweeps, theory tables,
// cycle traces and the BAR0 register map.
//
// Exit codes: 0 success, 1 usage error, 2 simulation deadlock,
// 3 integrity mismatch.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcie_dma/experiments.h"
#include "pcie_dma/register_file.h"
#include "pcie_dma/system.h"

namespace {

using namespace pcie_dma;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDeadlock = 2;
constexpr int kExitMismatch = 3;

struct CommonOptions {
  uint32_t lanes = 8;
  uint64_t cpl_latency = 64;
  uint64_t isr_latency = 32;
  int64_t overhead = -1;  // -1: default per-TLP overhead
  std::string format = "csv";
  std::string out;
  std::string trace_path;
  std::string trace_format = "text";
  uint32_t seed = 0;
  bool serial = false;
  bool split = false;
  uint64_t max_cycles = 100'000'000;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--lanes", o.lanes, "PCIe lane count")->check(CLI::Range(1u, 32u));
  sub->add_option("--cpl-latency", o.cpl_latency, "host MRd completion latency (cycles)");
  sub->add_option("--isr-latency", o.isr_latency, "MSI to ISR latency (cycles)");
  sub->add_option("--overhead", o.overhead, "per-TLP link overhead in bytes (default 20)");
  sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", o.out, "report path (default stdout)");
  sub->add_option("--trace", o.trace_path, "write the cycle trace to PATH");
  sub->add_option("--trace-format", o.trace_format, "trace format")
      ->check(CLI::IsMember({"text", "jsonl"}));
  sub->add_option("--seed", o.seed, "data pattern seed");
  sub->add_option("--max-cycles", o.max_cycles, "cycle bound per system");
  sub->add_flag("--serial", o.serial, "run sweep points on one thread");
  sub->add_flag("--split-completions", o.split, "split completions at 64-byte boundaries");
}

SimConfig make_config(const CommonOptions& o) {
  SimConfig c;
  c.lanes = o.lanes;
  c.cpl_latency_cycles = o.cpl_latency;
  c.isr_latency_cycles = o.isr_latency;
  if (o.overhead >= 0) c.overhead = OverheadConfig::fixed(static_cast<uint32_t>(o.overhead));
  c.seed = o.seed;
  c.trace = !o.trace_path.empty();
  c.split_completions = o.split;
  c.max_cycles = o.max_cycles;
  return c;
}

ReportFormat report_format(const CommonOptions& o) {
  return o.format == "json" ? ReportFormat::kJson : ReportFormat::kCsv;
}

TraceFormat trace_format(const CommonOptions& o) {
  return o.trace_format == "jsonl" ? TraceFormat::kJsonl : TraceFormat::kText;
}

void write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    std::cout.flush();
    if (!std::cout) throw SimError(ErrorCode::kIoFailure, "writing to stdout");
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << data;
  if (!f) throw SimError(ErrorCode::kIoFailure, "writing " + path);
}

std::string point_header(const std::string& key, uint64_t value, TraceFormat format) {
  if (format == TraceFormat::kText) return "# point " + key + "=" + std::to_string(value) + "\n";
  nlohmann::ordered_json j;
  j["kind"] = "point";
  j[key] = value;
  return j.dump() + "\n";
}

int run_mwr(const CommonOptions& o, uint32_t payload_dw, const std::vector<uint64_t>& points) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kMwrSweep;
  spec.points = points.empty() ? default_mwr_points() : points;
  spec.payload_len_dw = payload_dw;
  spec.config = make_config(o);
  spec.trace_format = trace_format(o);
  auto result = run_mwr_sweep(spec, o.serial ? Execution::kSerial : Execution::kParallel);
  write_output(o.out, emit_report(result.rows, report_format(o)));
  if (spec.config.trace) {
    std::string t;
    for (size_t i = 0; i < result.traces.size(); ++i) {
      t += point_header("data_bytes", spec.points[i], spec.trace_format) + result.traces[i];
    }
    write_output(o.trace_path, t);
  }
  for (const auto& r : result.rows) {
    if (r.mismatches != 0) return kExitMismatch;
  }
  return kExitOk;
}

int run_mrd(const CommonOptions& o, const std::vector<uint64_t>& points) {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kMrdSweep;
  spec.points = points.empty() ? default_mrd_points() : points;
  spec.config = make_config(o);
  spec.trace_format = trace_format(o);
  auto result = run_mrd_sweep(spec, o.serial ? Execution::kSerial : Execution::kParallel);
  write_output(o.out, emit_report(result.rows, report_format(o)));
  if (spec.config.trace) {
    std::string t;
    for (size_t i = 0; i < result.traces.size(); ++i) {
      t += point_header("pl_dw", spec.points[i], spec.trace_format) + result.traces[i];
    }
    write_output(o.trace_path, t);
  }
  for (const auto& r : result.rows) {
    if (!r.integrity_ok) return kExitMismatch;
  }
  return kExitOk;
}

int run_theory(const CommonOptions& o, const std::vector<uint64_t>& points,
               const std::vector<uint64_t>& link_payloads) {
  std::string report;
  if (!link_payloads.empty()) {
    validate_points(link_payloads);
    const SimConfig c = make_config(o);
    report = emit_report(link_table(link_payloads, wire_overhead_bytes(c.overhead), c.lanes),
                         report_format(o));
  } else {
    const auto& pts = points.empty() ? default_theory_points() : points;
    validate_points(pts);
    report = emit_report(theory_table(pts), report_format(o));
  }
  write_output(o.out, report);
  return kExitOk;
}

int run_trace(const CommonOptions& o, const std::string& op, uint32_t payload_dw,
              uint32_t count, const std::string& tlp_dump) {
  SimConfig c = make_config(o);
  c.trace = true;
  System sys(c);
  if (op == "mwr") {
    sys.program_mwr(c.rx_base, payload_dw, count);
  } else {
    sys.program_mrd(c.effective_tx_base(), payload_dw, count);
  }
  const RunResult r = sys.run_until_idle();
  const TraceFormat tf = trace_format(o);
  write_output(o.trace_path, emit_trace(sys.trace(), tf) + emit_snapshot(sys.regs().snapshot(), tf));
  if (!tlp_dump.empty()) {
    std::string lines;
    for (const auto& l : sys.tlp_log()) lines += l + "\n";
    write_output(tlp_dump, lines);
  }
  if (!o.out.empty()) write_output(o.out, run_result_json(r) + "\n");
  return r.mismatches == 0 ? kExitOk : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transaction-level PCIe Gen1 x8 DMA simulator"};
  app.require_subcommand(1);

  CommonOptions common;
  std::vector<uint64_t> points;
  std::vector<uint64_t> link_payloads;
  uint32_t payload_dw = 4;
  uint32_t count = 1;
  std::string op = "mwr";
  std::string tlp_dump;

  auto* mwr = app.add_subcommand("mwr-sweep", "MWR throughput vs. data size");
  add_common(mwr, common);
  mwr->add_option("--payload-dw", payload_dw, "payload DWORDs per MWr TLP")
      ->check(CLI::Range(1u, 1024u));
  mwr->add_option("--points", points, "data sizes in bytes");

  auto* mrd = app.add_subcommand("mrd-sweep", "single MRd completion vs. payload size");
  add_common(mrd, common);
  mrd->add_option("--points", points, "payload sizes in DWORDs");

  auto* theory = app.add_subcommand("theory", "closed-form throughput tables");
  add_common(theory, common);
  theory->add_option("--points", points, "payload sizes in DWORDs");
  theory->add_option("--link-payload", link_payloads,
                     "print link throughput for these payload sizes in bytes instead");

  auto* trace = app.add_subcommand("trace", "cycle trace of a single DMA run");
  add_common(trace, common);
  trace->add_option("--op", op, "DMA direction")->check(CLI::IsMember({"mwr", "mrd"}));
  trace->add_option("--payload-dw", payload_dw, "payload DWORDs per TLP")
      ->check(CLI::Range(1u, 1024u));
  trace->add_option("--count", count, "TLP count")->check(CLI::Range(1u, 1u << 20));
  trace->add_option("--tlp-dump", tlp_dump, "write one line per TLP to PATH");

  auto* regmap = app.add_subcommand("regmap", "print the BAR0 register map");
  regmap->add_option("--out", common.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*mwr) return run_mwr(common, payload_dw, points);
    if (*mrd) return run_mrd(common, points);
    if (*theory) return run_theory(common, points, link_payloads);
    if (*trace) return run_trace(common, op, payload_dw, count, tlp_dump);
    if (*regmap) {
      write_output(common.out, format_register_map());
      return kExitOk;
    }
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kDeadlockDetected || e.code() == ErrorCode::kHalted
               ? kExitDeadlock
               : kExitUsage;
  }
  return kExitUsage;
}
