#include "reflab/rng.hpp"

#include <cmath>

namespace reflab {

const ZigguratTables& ziggurat_tables() {
  // Marsaglia & Tsang (2000), 128 layers
  static const ZigguratTables tables = [] {
    ZigguratTables z{};
    const double m1 = 2147483648.0;
    double dn = 3.442619855899, tn = dn;
    const double vn = 9.91256303526217e-3;
    const double q = vn / std::exp(-0.5 * dn * dn);
    z.kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    z.kn[1] = 0;
    z.wn[0] = q / m1;
    z.wn[127] = dn / m1;
    z.fn[0] = 1.0;
    z.fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      z.kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      z.fn[i] = std::exp(-0.5 * dn * dn);
      z.wn[i] = dn / m1;
    }
    return z;
  }();
  return tables;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t path_index)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      slow_key_{static_cast<std::uint32_t>(seed) ^ 0xA511E9B3u, static_cast<std::uint32_t>(seed >> 32) ^ 0x63D83595u},
      path_lo_(static_cast<std::uint32_t>(path_index)),
      path_hi_(static_cast<std::uint32_t>(path_index >> 32)) {}

void NormalStream::refill() {
  words_ = Philox4x32::block({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), path_lo_,
                              path_hi_},
                             key_);
  ++block_;
  slot_ = 0;
}

void NormalStream::seek(std::uint64_t n) {
  block_ = n / 3;
  refill();
  slot_ = static_cast<int>(n % 3);
}

double NormalStream::at(std::uint64_t n) const {
  const std::uint64_t b = n / 3;
  const int s = static_cast<int>(n % 3);
  const auto w = Philox4x32::block(
      {static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), path_lo_, path_hi_}, key_);
  return draw(n, w[s], (w[3] >> (7 * s)) & 127u);
}

double NormalStream::slow(std::uint64_t n, std::int32_t hz, std::uint32_t layer) const {
  const auto& z = ziggurat_tables();
  constexpr double kR = 3.442620;
  std::uint32_t attempt = 0;
  Philox4x32::Counter w{};
  int used = 4;
  auto word = [&]() -> std::uint32_t {
    if (used == 4) {
      w = Philox4x32::block({static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32) ^ (attempt++ << 20),
                             path_lo_, path_hi_},
                            slow_key_);
      used = 0;
    }
    return w[used++];
  };
  auto uni = [&] { return (static_cast<double>(word()) + 0.5) * (1.0 / 4294967296.0); };
  for (;;) {
    const double x = hz * z.wn[layer];
    if (layer == 0) {
      double xt, y;
      do {
        xt = -std::log(uni()) / kR;
        y = -std::log(uni());
      } while (y + y < xt * xt);
      return hz > 0 ? kR + xt : -kR - xt;
    }
    if (z.fn[layer] + uni() * (z.fn[layer - 1] - z.fn[layer]) < std::exp(-0.5 * x * x)) return x;
    hz = static_cast<std::int32_t>(word());
    layer = word() & 127u;
    const std::uint32_t mag = hz < 0 ? 0u - static_cast<std::uint32_t>(hz) : static_cast<std::uint32_t>(hz);
    if (mag < z.kn[layer]) return hz * z.wn[layer];
  }
}

}  // namespace reflab
