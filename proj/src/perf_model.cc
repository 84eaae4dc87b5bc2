#include "pcie_dma/perf_model.h"

#include <cstdio>
#include <numeric>

#include "pcie_dma/error.h"

namespace pcie_dma {
namespace {

using Wide = __int128;

Rational reduce(Wide num, Wide den) {
  if (den == 0) throw SimError(ErrorCode::kInvalidConfig, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide a = num < 0 ? -num : num;
  Wide b = den;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return Rational(static_cast<int64_t>(num), static_cast<int64_t>(den));
}

}  // namespace

Rational::Rational(int64_t num, int64_t den) : num_(num), den_(den) {
  if (den_ == 0) throw SimError(ErrorCode::kInvalidConfig, "rational with zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  const int64_t g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

std::string Rational::str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

Rational operator+(const Rational& a, const Rational& b) {
  return reduce(Wide{a.num_} * b.den_ + Wide{b.num_} * a.den_, Wide{a.den_} * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) {
  return reduce(Wide{a.num_} * b.den_ - Wide{b.num_} * a.den_, Wide{a.den_} * b.den_);
}
Rational operator*(const Rational& a, const Rational& b) {
  return reduce(Wide{a.num_} * b.num_, Wide{a.den_} * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  return reduce(Wide{a.num_} * b.den_, Wide{a.den_} * b.num_);
}
std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const Wide l = Wide{a.num_} * b.den_;
  const Wide r = Wide{b.num_} * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational link_throughput(const LinkParams& p) {
  if (p.payload_bytes < 1 || p.lanes < 1) {
    throw SimError(ErrorCode::kInvalidConfig, "payload_bytes and lanes must be >= 1");
  }
  return Rational(p.payload_bytes, int64_t{p.payload_bytes} + p.overhead_bytes) *
         Rational(int64_t{p.lanes} * p.per_lane_mbps);
}

Rational dma_efficiency(uint32_t pl_dw) {
  if (pl_dw < 1) throw SimError(ErrorCode::kInvalidConfig, "pl_dw must be >= 1");
  return Rational(pl_dw, int64_t{pl_dw} + 1);
}

Rational dma_theoretical_speed(uint32_t pl_dw) {
  if (pl_dw < 1) throw SimError(ErrorCode::kInvalidConfig, "pl_dw must be >= 1");
  return Rational(int64_t{pl_dw} * 4, (int64_t{pl_dw} + 1) * 8);
}

Rational measured_speed(uint64_t data_bytes, uint64_t counter_clocks, uint32_t clock_period_ns) {
  if (counter_clocks == 0) throw SimError(ErrorCode::kZeroCounter, "counter value is 0");
  return Rational(static_cast<int64_t>(data_bytes),
                  static_cast<int64_t>(clock_period_ns) * static_cast<int64_t>(counter_clocks));
}

uint64_t payload_beats(uint32_t pl_dw, uint32_t beat_bytes) {
  return (4ull * pl_dw + beat_bytes - 1) / beat_bytes;
}

uint64_t mwr_cycle_oracle(uint32_t pl_dw, uint64_t count, uint32_t beat_bytes) {
  if (count == 0) return 0;
  return count * (1 + payload_beats(pl_dw, beat_bytes)) + (count - 1);
}

uint64_t mrd_cycle_oracle(uint32_t pl_dw, uint64_t count, uint32_t beat_bytes) {
  return count * (1 + payload_beats(pl_dw, beat_bytes));
}

Rational mwr_cycle_model_speed(uint32_t pl_dw, uint32_t beat_bytes) {
  // Per TLP in steady state: request beat, payload beats, dummy beat.
  const int64_t clocks = static_cast<int64_t>(2 + payload_beats(pl_dw, beat_bytes));
  return Rational(int64_t{pl_dw} * 4, clocks * kClockPeriodNs);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace pcie_dma
