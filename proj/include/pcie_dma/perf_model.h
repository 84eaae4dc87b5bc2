#pragma once

// Closed-form throughput model and the analytic cycle counts the simulator
// is checked against. Values are exact rationals; conversion to floating
// point happens only at the edge.

#include <compare>
#include <cstdint>
#include <string>

namespace pcie_dma {

class Rational {
 public:
  constexpr Rational() = default;
  Rational(int64_t num, int64_t den = 1);

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;  // "num/den"

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  int64_t num_ = 0;
  int64_t den_ = 1;
};

inline constexpr int64_t kGen1LaneMBps = 250;  // 2.5 Gb/s after 8b/10b
inline constexpr uint32_t kClockPeriodNs = 8;  // 125 MHz user clock
inline constexpr uint32_t kBeatBytes = 16;     // 128-bit interface

struct LinkParams {
  uint32_t payload_bytes = 128;
  uint32_t overhead_bytes = 20;
  uint32_t lanes = 8;
  int64_t per_lane_mbps = kGen1LaneMBps;
};

// P / (P + H) * N * 250 MB/s.
Rational link_throughput(const LinkParams& p);

// PL / (PL + 1).
Rational dma_efficiency(uint32_t pl_dw);

// PL*4 / ((PL+1)*8) GB/s.
Rational dma_theoretical_speed(uint32_t pl_dw);

// D / (period * counter) GB/s; bytes per nanosecond.
Rational measured_speed(uint64_t data_bytes, uint64_t counter_clocks,
                        uint32_t clock_period_ns = kClockPeriodNs);

uint64_t payload_beats(uint32_t pl_dw, uint32_t beat_bytes = kBeatBytes);

// count * (1 + beats(PL)) + (count - 1): request beat per TLP and one dummy
// beat between consecutive TLPs.
uint64_t mwr_cycle_oracle(uint32_t pl_dw, uint64_t count, uint32_t beat_bytes = kBeatBytes);

// count * (1 + beats(PL)): completion header beat plus payload beats.
uint64_t mrd_cycle_oracle(uint32_t pl_dw, uint64_t count, uint32_t beat_bytes = kBeatBytes);

// Steady-state MWR speed of the cycle model (count -> infinity).
Rational mwr_cycle_model_speed(uint32_t pl_dw, uint32_t beat_bytes = kBeatBytes);

std::string format_fixed(double v, int decimals);

}  // namespace pcie_dma
