#pragma once

// Checkpoint layout, all integers and floats little-endian:
//   0   "HCHO1"            5 bytes
//   5   version            u32 (= 1)
//   9   n                  u32
//   13  box length         f64
//   21  time               f64
//   29  config hash        u64
//   37  header checksum    u64, FNV-1a of bytes 0..36
//   45  u then v           n^3 (re f64, im f64) each, FFT storage order
//   end payload checksum   u64, FNV-1a of the coefficient bytes

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "hcho/errors.hpp"
#include "hcho/spectral_field.hpp"
#include "hcho/table.hpp"

namespace hcho {

inline constexpr char kCheckpointMagic[5] = {'H', 'C', 'H', 'O', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 45;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  double length = 0.0;
  std::uint64_t config_hash = 0;
  StateVector state;
};

namespace detail {

inline void put_u32(std::vector<unsigned char>& b, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(x >> (8 * i)));
}
inline void put_u64(std::vector<unsigned char>& b, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<unsigned char>(x >> (8 * i)));
}
inline void put_f64(std::vector<unsigned char>& b, double x) { put_u64(b, std::bit_cast<std::uint64_t>(x)); }

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= std::uint32_t(p[i]) << (8 * i);
  return x;
}
inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= std::uint64_t(p[i]) << (8 * i);
  return x;
}
inline double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const StateVector& s, std::uint64_t config_hash) {
  const Grid& g = s.grid();
  std::vector<unsigned char> b;
  b.reserve(kCheckpointHeaderBytes + 32 * g.size() + 8);
  b.insert(b.end(), std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  detail::put_u32(b, kCheckpointVersion);
  detail::put_u32(b, std::uint32_t(g.n()));
  detail::put_f64(b, g.length());
  detail::put_f64(b, s.time);
  detail::put_u64(b, config_hash);
  detail::put_u64(b, fnv1a64(b.data(), b.size()));
  for (const SpectralField* f : {&s.u, &s.v}) {
    for (const Complex& c : f->coefficients()) {
      detail::put_f64(b, c.real());
      detail::put_f64(b, c.imag());
    }
  }
  detail::put_u64(b, fnv1a64(b.data() + kCheckpointHeaderBytes, b.size() - kCheckpointHeaderBytes));
  return b;
}

// With expected_hash set, a different stored hash is refused.
inline Checkpoint decode_checkpoint(const std::vector<unsigned char>& b,
                                    std::optional<std::uint64_t> expected_hash = std::nullopt) {
  if (b.size() < kCheckpointHeaderBytes) throw DataIntegrityError("checkpoint: truncated header");
  if (std::memcmp(b.data(), kCheckpointMagic, 5) != 0) throw DataIntegrityError("checkpoint: bad magic");
  if (detail::get_u64(b.data() + 37) != fnv1a64(b.data(), 37)) {
    throw DataIntegrityError("checkpoint: header checksum mismatch");
  }
  const std::uint32_t version = detail::get_u32(b.data() + 5);
  if (version != kCheckpointVersion) {
    throw DataIntegrityError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t n = detail::get_u32(b.data() + 9);
  const double length = detail::get_f64(b.data() + 13);
  const double time = detail::get_f64(b.data() + 21);
  const std::uint64_t hash = detail::get_u64(b.data() + 29);
  if (n < 8 || n > 1024 || n % 2) throw DataIntegrityError("checkpoint: implausible grid size");
  const std::size_t count = std::size_t(n) * n * n;
  const std::size_t expected = kCheckpointHeaderBytes + 32 * count + 8;
  if (b.size() != expected) {
    throw DataIntegrityError("checkpoint: size " + std::to_string(b.size()) + " bytes, expected " +
                             std::to_string(expected));
  }
  const std::size_t payload_end = expected - 8;
  if (detail::get_u64(b.data() + payload_end) !=
      fnv1a64(b.data() + kCheckpointHeaderBytes, payload_end - kCheckpointHeaderBytes)) {
    throw DataIntegrityError("checkpoint: payload checksum mismatch");
  }
  if (expected_hash && *expected_hash != hash) {
    throw ConfigHashMismatch("checkpoint was written by configuration " + hex64(hash) +
                             " but the current configuration is " + hex64(*expected_hash) + "; refusing to resume");
  }
  const Grid g(length, int(n));
  StateVector s(g, time);
  const unsigned char* p = b.data() + kCheckpointHeaderBytes;
  for (SpectralField* f : {&s.u, &s.v}) {
    for (Complex& c : f->coefficients()) {
      c = Complex(detail::get_f64(p), detail::get_f64(p + 8));
      p += 16;
    }
  }
  return Checkpoint{version, length, hash, std::move(s)};
}

inline void checkpoint_write(const std::filesystem::path& path, const StateVector& state, std::uint64_t config_hash) {
  const auto bytes = encode_checkpoint(state, config_hash);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("checkpoint: cannot open " + tmp);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw ConfigError("checkpoint: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint checkpoint_read(const std::filesystem::path& path,
                                  std::optional<std::uint64_t> expected_hash = std::nullopt) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataIntegrityError("checkpoint: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes, expected_hash);
}

}  // namespace hcho
