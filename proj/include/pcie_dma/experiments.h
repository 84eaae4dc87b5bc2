#pragma once

// Throughput experiments behind the command-line tool: MWR data-size sweep,
// single-MRD payload sweep, theory tables and report serialization.
//
// Each sweep point owns its System, so points are independent. The parallel
// runner distributes points over OpenMP threads; the serial runner is the
// reference it is tested against. Rows are always returned in sweep order.

#include <cstdint>
#include <string>
#include <vector>

#include "pcie_dma/perf_model.h"
#include "pcie_dma/system.h"
#include "pcie_dma/trace.h"

namespace pcie_dma {

enum class ExperimentKind { kMwrSweep, kMrdSweep, kTheory, kTrace, kRegMap };
enum class ReportFormat { kCsv, kJson };
enum class Execution { kSerial, kParallel };

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kMwrSweep;
  std::vector<uint64_t> points;  // data bytes (MWR) or payload DWORDs (MRD)
  uint32_t payload_len_dw = 4;   // MWR payload per TLP
  SimConfig config;
  ReportFormat format = ReportFormat::kCsv;
  TraceFormat trace_format = TraceFormat::kText;
};

// Powers of two from 64 B to 1 MB.
std::vector<uint64_t> default_mwr_points();
// 4 .. 1024 DWORDs in powers of two.
std::vector<uint64_t> default_mrd_points();

// Non-empty and strictly increasing, else InvalidConfig.
void validate_points(const std::vector<uint64_t>& points);

struct MwrRow {
  uint64_t data_bytes = 0;
  uint64_t counter = 0;
  double v_gbps = 0.0;
  uint64_t mismatches = 0;
  bool operator==(const MwrRow&) const = default;
};

struct MrdRow {
  uint32_t pl_dw = 0;
  uint64_t counter = 0;
  double v_gbps = 0.0;
  bool integrity_ok = false;
  bool operator==(const MrdRow&) const = default;
};

template <class Row>
struct SweepResult {
  std::vector<Row> rows;
  std::vector<std::string> traces;  // per point, filled when config.trace is set
};

MwrRow run_mwr_point(const SimConfig& config, uint32_t payload_len_dw, uint64_t data_bytes,
                     std::string* trace = nullptr, TraceFormat format = TraceFormat::kText);
MrdRow run_mrd_point(const SimConfig& config, uint32_t payload_len_dw,
                     std::string* trace = nullptr, TraceFormat format = TraceFormat::kText);

SweepResult<MwrRow> run_mwr_sweep(const ExperimentSpec& spec,
                                  Execution exec = Execution::kParallel);
SweepResult<MrdRow> run_mrd_sweep(const ExperimentSpec& spec,
                                  Execution exec = Execution::kParallel);

// Simulated counters for every (PL, count) in [1, max_pl] x [1, max_count],
// PL-major order.
struct GridPoint {
  uint32_t pl_dw;
  uint32_t count;
  uint64_t mwr_perf;
  uint64_t mrd_perf;
  uint64_t mismatches;
  bool operator==(const GridPoint&) const = default;
};

std::vector<GridPoint> run_counter_grid(const SimConfig& config, uint32_t max_pl,
                                        uint32_t max_count, Execution exec = Execution::kParallel);

struct TheoryRow {
  uint32_t pl_dw;
  Rational efficiency;
  Rational v_theory_gbps;
  Rational v_cycle_model_gbps;
  Rational delta;
};

std::vector<uint64_t> default_theory_points();
std::vector<TheoryRow> theory_table(const std::vector<uint64_t>& points,
                                    uint32_t beat_bytes = kBeatBytes);

struct LinkRow {
  uint32_t payload_bytes;
  uint32_t overhead_bytes;
  uint32_t lanes;
  Rational v_link_mbps;
};

std::vector<LinkRow> link_table(const std::vector<uint64_t>& payload_bytes,
                                uint32_t overhead_bytes, uint32_t lanes);

// CSV (header + rows, 5 significant digits) or a JSON array.
std::string emit_report(const std::vector<MwrRow>& rows, ReportFormat format);
std::string emit_report(const std::vector<MrdRow>& rows, ReportFormat format);
std::string emit_report(const std::vector<TheoryRow>& rows, ReportFormat format);
std::string emit_report(const std::vector<LinkRow>& rows, ReportFormat format);

std::string format_sig5(double v);

}  // namespace pcie_dma
