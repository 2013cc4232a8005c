#pragma once

#include <array>
#include <cstdint>

namespace reflab {

/// Philox4x32-10 (Salmon et al., SC'11): a keyed bijection on 128-bit counters.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter c, Key k) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += kW0;
      k[1] += kW1;
    }
    return c;
  }
};

/// Standard normals for one path, addressed by a flat index n.
///
/// Normal n is drawn by a 128-level ziggurat from Philox block n/3 under
/// key `seed` with counter (n/3, path_index): word n%3 supplies the signed
/// abscissa and 7 bits of word 3 the layer index. The rare wedge and tail
/// rejections draw from a second key, with counter (n, path_index). Any
/// normal of any path can therefore be regenerated in isolation.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t path_index);

  double next() {
    if (slot_ == 3) refill();
    const int s = slot_++;
    return draw(block_ * 3 - 3 + s, words_[s], (words_[3] >> (7 * s)) & 127u);
  }

  /// The n-th normal of the stream, independent of the stream position.
  double at(std::uint64_t n) const;

  /// Skip to normal index n.
  void seek(std::uint64_t n);

 private:
  void refill();
  double draw(std::uint64_t n, std::uint32_t word, std::uint32_t layer) const;
  double slow(std::uint64_t n, std::int32_t hz, std::uint32_t layer) const;

  Philox4x32::Key key_, slow_key_;
  std::uint32_t path_lo_, path_hi_;
  std::uint64_t block_ = 0;  ///< next block to generate
  Philox4x32::Counter words_{};
  int slot_ = 3;
};

struct ZigguratTables {
  std::array<std::uint32_t, 128> kn;
  std::array<double, 128> wn, fn;
};
const ZigguratTables& ziggurat_tables();

inline double NormalStream::draw(std::uint64_t n, std::uint32_t word, std::uint32_t layer) const {
  const auto& z = ziggurat_tables();
  const std::int32_t hz = static_cast<std::int32_t>(word);
  const std::uint32_t mag = hz < 0 ? 0u - static_cast<std::uint32_t>(hz) : static_cast<std::uint32_t>(hz);
  if (mag < z.kn[layer]) return hz * z.wn[layer];
  return slow(n, hz, layer);
}

}  // namespace reflab
