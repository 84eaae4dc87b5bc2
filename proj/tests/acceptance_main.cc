// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. argv[1], when given, is the command-line tool used for the
// end-to-end determinism check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "generators.h"
#include "pcie_dma/experiments.h"
#include "pcie_dma/perf_model.h"
#include "pcie_dma/system.h"
#include "pcie_dma/tlp.h"

namespace {

using namespace pcie_dma;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail.clear();
  o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += why;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome ac1_headline() {
  Outcome o;
  const auto t0 = Clock::now();
  ExperimentSpec spec;
  spec.points = {65536};
  spec.payload_len_dw = 4;
  const MwrRow row = run_mwr_sweep(spec).rows.at(0);
  const double elapsed = seconds_since(t0);
  const Rational exact = measured_speed(65536, row.counter);
  const double v = row.v_gbps;
  if (row.counter != 12287) fail(o, "counter " + std::to_string(row.counter));
  if (exact != Rational(8192, 12287)) fail(o, "speed " + exact.str());
  // 0.66673 as quoted; the exact quotient 0.666721 rounds to 0.66672.
  if (std::abs(v - 0.66673) > 5e-5) fail(o, fmt("v=%.6f far from 0.66673", v));
  if (std::abs(v - 2.0 / 3.0) / (2.0 / 3.0) >= 1e-3) fail(o, "outside 0.1% of 2/3");
  if (!(v > 0.666)) fail(o, "not above 666 MB/s");
  if (row.mismatches != 0) fail(o, "mismatches");
  if (elapsed >= 1.0) fail(o, fmt("runtime %.3f s", elapsed));
  if (o.pass) {
    o.detail = "counter=12287 v=" + fmt("%.6f", v) + " GB/s (" + format_sig5(v) +
               ") within " + fmt("%.4f", 100 * std::abs(v - 2.0 / 3.0) / (2.0 / 3.0)) +
               "% of 2/3, " + fmt("%.3f s", elapsed);
  }
  return o;
}

Outcome ac2_oracle_grid() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto grid = run_counter_grid(SimConfig{}, 64, 64);
  const double elapsed = seconds_since(t0);
  size_t bad = 0;
  for (const auto& p : grid) {
    if (p.mwr_perf != mwr_cycle_oracle(p.pl_dw, p.count) ||
        p.mrd_perf != mrd_cycle_oracle(p.pl_dw, p.count) || p.mismatches != 0) {
      if (bad++ == 0) {
        fail(o, "PL=" + std::to_string(p.pl_dw) + " N=" + std::to_string(p.count) +
                    " mwr=" + std::to_string(p.mwr_perf) + " mrd=" + std::to_string(p.mrd_perf));
      }
    }
  }
  if (grid.size() != 64 * 64) fail(o, "grid size " + std::to_string(grid.size()));
  if (bad > 1) fail(o, std::to_string(bad) + " points differ");
  if (elapsed >= 30.0) fail(o, fmt("runtime %.1f s", elapsed));
  if (o.pass) {
    o.detail = std::to_string(2 * grid.size()) + " runs exact, " + fmt("%.2f s", elapsed);
  }
  return o;
}

Outcome ac3_codec() {
  Outcome o;
  testing::Rng rng(20260101);
  size_t round_trips = 0;
  for (int i = 0; i < 10000; ++i) {
    const Tlp t = testing::gen_valid_tlp(rng);
    try {
      if (decode(encode(t)) == t) ++round_trips;
    } catch (const SimError& e) {
      fail(o, std::string("round trip threw ") + e.what());
      break;
    }
  }
  size_t decoded = 0;
  size_t typed = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto bytes = testing::mutate(rng, encode(testing::gen_valid_tlp(rng)));
    try {
      decode(bytes);
      ++decoded;
    } catch (const SimError&) {
      ++typed;
    } catch (...) {
      fail(o, "untyped exception");
    }
  }
  if (round_trips != 10000) fail(o, std::to_string(round_trips) + "/10000 round trips");
  if (decoded + typed != 10000) fail(o, "mutation accounting");
  if (o.pass) {
    o.detail = "10000 round trips exact; mutations: " + std::to_string(decoded) + " decoded, " +
               std::to_string(typed) + " typed errors";
  }
  return o;
}

Outcome ac4_link() {
  Outcome o;
  const double a = link_throughput({128, 20, 8}).to_double();
  const double b = link_throughput({16, 20, 8}).to_double();
  if (std::abs(a - 1729.73) > 0.01) fail(o, fmt("P=128 gives %.4f", a));
  if (std::abs(b - 888.89) > 0.01) fail(o, fmt("P=16 gives %.4f", b));
  if (o.pass) o.detail = format_fixed(a, 2) + " and " + format_fixed(b, 2) + " MB/s";
  return o;
}

Outcome ac5_dma_formulas() {
  Outcome o;
  if (dma_efficiency(16) != Rational(16, 17)) fail(o, "F(16)=" + dma_efficiency(16).str());
  if (dma_theoretical_speed(4) != Rational(2, 5)) {
    fail(o, "V(4)=" + dma_theoretical_speed(4).str());
  }
  for (uint32_t pl = 1; pl <= 1024; ++pl) {
    if (dma_theoretical_speed(pl) != dma_efficiency(pl) * Rational(1, 2)) {
      fail(o, "identity fails at PL=" + std::to_string(pl));
      break;
    }
  }
  if (o.pass) o.detail = "F(16)=16/17, V(4)=2/5, V=F/2 for PL in [1,1024]";
  return o;
}

Outcome ac6_liveness() {
  Outcome o;
  const auto t0 = Clock::now();
  System sys{SimConfig{}};
  uint64_t moved = 0;
  uint64_t mismatches = 0;
  try {
    for (int round = 0; round < 1000; ++round) {
      sys.program_mwr(sys.config().rx_base, 4, 4096);
      const RunResult r = sys.run_until_idle();
      moved += r.bytes_written;
      mismatches += r.mismatches;
      if (r.mwr_perf != 12287) {
        fail(o, "round " + std::to_string(round) + " counter " + std::to_string(r.mwr_perf));
        break;
      }
    }
  } catch (const SimError& e) {
    fail(o, e.what());
  }
  const double elapsed = seconds_since(t0);
  const auto& hs = sys.host().stats();
  if (hs.msi_received != 1000) fail(o, "MSI count " + std::to_string(hs.msi_received));
  if (hs.int_acks != 1000) fail(o, "ack count " + std::to_string(hs.int_acks));
  if (hs.bytes_verified != 1000ull * 65536) fail(o, "verified " + std::to_string(hs.bytes_verified));
  if (moved != 1000ull * 65536) fail(o, "moved " + std::to_string(moved));
  if (mismatches != 0) fail(o, std::to_string(mismatches) + " mismatches");
  if (elapsed >= 10.0) fail(o, fmt("runtime %.2f s", elapsed));
  if (o.pass) {
    o.detail = "1000 MSI, 1000 acks, " + std::to_string(moved) + " bytes verified, " +
               fmt("%.2f s", elapsed);
  }
  return o;
}

Outcome ac7_mrd_flow() {
  Outcome o;
  for (uint64_t pl : default_mrd_points()) {
    System sys{SimConfig{}};
    const std::string at = "PL=" + std::to_string(pl) + ": ";
    try {
      sys.program_mrd(sys.config().effective_tx_base(), static_cast<uint32_t>(pl), 1);
      const RunResult r = sys.run_until_idle();
      const auto& ep = sys.endpoint();
      if (!ep.rx_mismatches().empty() || ep.stats().rx_mismatch_count != 0) {
        fail(o, at + "pattern mismatch");
      }
      if (ep.stats().rx_dwords_checked != pl) fail(o, at + "checked dwords");
      if (r.interrupts.mrd != 1 || ep.stats().msi_sent != 1) fail(o, at + "MSI count");
      if (sys.host().stats().mrd_stops != 1) fail(o, at + "no MRD_STOP");
      if (ep.rx_state() != RxState::kIdle) fail(o, at + "RX not Idle");
    } catch (const SimError& e) {
      fail(o, at + e.what());
    }
  }
  if (o.pass) o.detail = "9 payloads intact, one MSI each, RX back to Idle after MRD_STOP";
  return o;
}

Outcome ac8_trends() {
  Outcome o;
  ExperimentSpec mwr;
  mwr.points = default_mwr_points();
  const auto mrows = run_mwr_sweep(mwr).rows;
  for (size_t i = 0; i < mrows.size(); ++i) {
    const double v = mrows[i].v_gbps;
    const Rational exact = measured_speed(mrows[i].data_bytes, mrows[i].counter);
    if (!(exact > Rational(2, 3)) || exact > Rational(1)) {
      fail(o, "MWR D=" + std::to_string(mrows[i].data_bytes) + fmt(" v=%.6f", v));
    }
    if (i > 0 && exact > measured_speed(mrows[i - 1].data_bytes, mrows[i - 1].counter)) {
      fail(o, "MWR increases at D=" + std::to_string(mrows[i].data_bytes));
    }
  }
  ExperimentSpec mrd;
  mrd.points = default_mrd_points();
  const auto rrows = run_mrd_sweep(mrd).rows;
  for (size_t i = 0; i < rrows.size(); ++i) {
    const Rational exact = measured_speed(4ull * rrows[i].pl_dw, rrows[i].counter);
    if (exact > Rational(2)) fail(o, "MRD above 2 GB/s at PL=" + std::to_string(rrows[i].pl_dw));
    if (i > 0 && exact < measured_speed(4ull * rrows[i - 1].pl_dw, rrows[i - 1].counter)) {
      fail(o, "MRD decreases at PL=" + std::to_string(rrows[i].pl_dw));
    }
  }
  if (o.pass) {
    o.detail = "MWR " + format_sig5(mrows.front().v_gbps) + " -> " +
               format_sig5(mrows.back().v_gbps) + " GB/s; MRD " +
               format_sig5(rrows.front().v_gbps) + " -> " + format_sig5(rrows.back().v_gbps) +
               " GB/s";
  }
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome ac9_determinism(const char* cli) {
  Outcome o;
  // Library level: serial and parallel runs, twice each.
  ExperimentSpec mwr;
  mwr.points = {64, 4096, 65536};
  mwr.config.trace = true;
  ExperimentSpec mrd;
  mrd.points = default_mrd_points();
  mrd.config.trace = true;
  mrd.trace_format = TraceFormat::kJsonl;
  std::vector<std::string> runs;
  for (Execution e : {Execution::kSerial, Execution::kParallel, Execution::kParallel}) {
    const auto a = run_mwr_sweep(mwr, e);
    const auto b = run_mrd_sweep(mrd, e);
    std::string all = emit_report(a.rows, ReportFormat::kCsv) +
                      emit_report(a.rows, ReportFormat::kJson) +
                      emit_report(b.rows, ReportFormat::kCsv) +
                      emit_report(b.rows, ReportFormat::kJson);
    for (const auto& t : a.traces) all += t;
    for (const auto& t : b.traces) all += t;
    runs.push_back(std::move(all));
  }
  if (runs[0] != runs[1] || runs[1] != runs[2]) fail(o, "library outputs differ");

  size_t compared = 0;
  if (cli != nullptr) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("pcie_dma_ac9_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::vector<std::string> invocations = {
        "mwr-sweep --format csv --trace-format text",
        "mwr-sweep --format json --trace-format jsonl --points 64 1024 65536 1048576",
        "mrd-sweep --format csv --trace-format text",
        "mrd-sweep --format json --trace-format jsonl",
        "theory --format csv",
        "theory --format json",
        "trace --op mwr --payload-dw 8 --count 16 --trace-format jsonl",
    };
    for (size_t i = 0; i < invocations.size(); ++i) {
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path out = dir / (std::to_string(i) + "_" + std::to_string(rep) + ".out");
        const fs::path tr = dir / (std::to_string(i) + "_" + std::to_string(rep) + ".trace");
        std::string cmd = std::string("\"") + cli + "\" " + invocations[i] + " --out \"" +
                          out.string() + "\"";
        if (invocations[i].rfind("theory", 0) != 0) cmd += " --trace \"" + tr.string() + "\"";
        if (std::system(cmd.c_str()) != 0) fail(o, "command failed: " + cmd);
      }
      for (const char* ext : {".out", ".trace"}) {
        const fs::path a = dir / (std::to_string(i) + "_0" + ext);
        const fs::path b = dir / (std::to_string(i) + "_1" + ext);
        if (!fs::exists(a)) continue;
        const std::string sa = slurp(a);
        if (sa.empty()) fail(o, "empty output: " + invocations[i]);
        if (sa != slurp(b)) fail(o, std::string("differs: ") + invocations[i] + " " + ext);
        ++compared;
      }
    }
    fs::remove_all(dir);
  }
  if (o.pass) {
    o.detail = "library serial/parallel identical";
    if (cli != nullptr) o.detail += "; " + std::to_string(compared) + " CLI file pairs identical";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli = argc > 1 ? argv[1] : nullptr;
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "headline MWR throughput", ac1_headline},
      {"AC2", "counter oracle equivalence", ac2_oracle_grid},
      {"AC3", "codec soundness", ac3_codec},
      {"AC4", "link throughput calculator", ac4_link},
      {"AC5", "DMA efficiency and speed", ac5_dma_formulas},
      {"AC6", "handshake liveness and integrity", ac6_liveness},
      {"AC7", "MRD flow", ac7_mrd_flow},
      {"AC8", "throughput trends", ac8_trends},
      {"AC9", "determinism", [cli] { return ac9_determinism(cli); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
