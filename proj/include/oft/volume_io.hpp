#pragma once

// Volume file formats:
//   <name>.json  {"dims":[nx,ny,nz],"dtype":"f32","order":"x-fastest","endianness":"little"}
//   <name>.raw   nx*ny*nz little-endian IEEE-754 float32, x fastest, then y, then z
// plus read-only MRC2014 (mode 2) and 8-bit PGM slice export.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "volume.hpp"

namespace oft {

namespace detail {

inline std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

inline void floats_from_le(const unsigned char* bytes, std::span<float> out) {
  for (std::size_t n = 0; n < out.size(); ++n) {
    std::uint32_t u;
    std::memcpy(&u, bytes + 4 * n, 4);
    if constexpr (std::endian::native == std::endian::big) u = byteswap32(u);
    out[n] = std::bit_cast<float>(u);
  }
}

inline std::vector<unsigned char> floats_to_le(std::span<const float> in) {
  std::vector<unsigned char> bytes(4 * in.size());
  for (std::size_t n = 0; n < in.size(); ++n) {
    std::uint32_t u = std::bit_cast<std::uint32_t>(in[n]);
    if constexpr (std::endian::native == std::endian::big) u = byteswap32(u);
    std::memcpy(bytes.data() + 4 * n, &u, 4);
  }
  return bytes;
}

inline std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return buf;
}

inline void write_all(const std::filesystem::path& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

/// Paths of the header/raw pair for a volume. Accepts "name", "name.json" or "name.raw".
struct VolumePaths {
  std::filesystem::path header;
  std::filesystem::path raw;

  static VolumePaths from(const std::filesystem::path& p) {
    std::filesystem::path base = p;
    if (base.extension() == ".json" || base.extension() == ".raw") base.replace_extension();
    return {std::filesystem::path(base.string() + ".json"), std::filesystem::path(base.string() + ".raw")};
  }

  /// A companion raw file, e.g. companion("truth") -> name.truth.raw
  std::filesystem::path companion(const std::string& tag) const {
    auto base = header;
    base.replace_extension();
    return base.string() + "." + tag + ".raw";
  }
};

inline Dims parse_volume_header(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dims") || !j["dims"].is_array())
    throw IoError("volume header: missing \"dims\" array");
  const auto& dj = j["dims"];
  if (dj.size() < 2 || dj.size() > 3) throw IoError("volume header: \"dims\" must have 2 or 3 entries");
  for (const auto& e : dj)
    if (!e.is_number_integer() || e.get<long long>() <= 0 || e.get<long long>() > (1LL << 30))
      throw IoError("volume header: dims must be positive integers");
  Dims d{dj[0].get<int>(), dj[1].get<int>(), dj.size() == 3 ? dj[2].get<int>() : 1};
  if (j.value("dtype", std::string("f32")) != "f32")
    throw IoError("volume header: unsupported dtype \"" + j["dtype"].get<std::string>() + "\"");
  if (j.value("order", std::string("x-fastest")) != "x-fastest")
    throw IoError("volume header: unsupported order");
  if (j.value("endianness", std::string("little")) != "little")
    throw IoError("volume header: unsupported endianness");
  return d;
}

inline nlohmann::ordered_json volume_header(Dims d) {
  nlohmann::ordered_json j;
  j["dims"] = {d.nx, d.ny, d.nz};
  j["dtype"] = "f32";
  j["order"] = "x-fastest";
  j["endianness"] = "little";
  return j;
}

/// Reads raw float32 values for `dims` from `path`, rejecting size mismatch and non-finite values.
inline Volume read_raw_f32(const std::filesystem::path& path, Dims dims) {
  if (!std::filesystem::exists(path)) throw IoError("missing raw file " + path.string());
  const auto bytes = detail::read_all(path);
  if (bytes.size() != 4 * dims.count())
    throw IoError("size mismatch: " + path.string() + " holds " + std::to_string(bytes.size()) +
                  " bytes, header dims " + to_string(dims) + " need " + std::to_string(4 * dims.count()));
  Volume vol(dims);
  detail::floats_from_le(bytes.data(), vol.values());
  if (!vol.all_finite()) throw IoError("non-finite values in " + path.string());
  return vol;
}

inline void write_raw_f32(const std::filesystem::path& path, const Volume& vol) {
  const auto bytes = detail::floats_to_le(vol.values());
  detail::write_all(path, bytes.data(), bytes.size());
}

inline Volume read_mrc(const std::filesystem::path& path);

/// Reads a volume from a .json/.raw pair or an .mrc file.
inline Volume read_volume(const std::filesystem::path& path) {
  if (path.extension() == ".mrc" || path.extension() == ".map" || path.extension() == ".rec")
    return read_mrc(path);
  const auto paths = VolumePaths::from(path);
  if (!std::filesystem::exists(paths.header)) throw IoError("missing header file " + paths.header.string());
  nlohmann::json header;
  try {
    std::ifstream in(paths.header);
    header = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("volume header " + paths.header.string() + ": " + e.what());
  }
  return read_raw_f32(paths.raw, parse_volume_header(header));
}

inline void write_volume(const Volume& vol, const std::filesystem::path& path) {
  if (!vol.all_finite()) throw InvalidArgument("refusing to write non-finite volume");
  const auto paths = VolumePaths::from(path);
  if (paths.header.has_parent_path()) std::filesystem::create_directories(paths.header.parent_path());
  const std::string text = volume_header(vol.dims()).dump(2) + "\n";
  detail::write_all(paths.header, text.data(), text.size());
  write_raw_f32(paths.raw, vol);
}

/// MRC2014, mode 2 (float32) only. Extended headers are skipped.
inline Volume read_mrc(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("missing file " + path.string());
  const auto bytes = detail::read_all(path);
  if (bytes.size() < 1024) throw IoError("MRC file too short: " + path.string());
  const bool big_endian_file = bytes[212] == 0x11 && bytes[213] == 0x11;
  auto word = [&](std::size_t off) {
    std::uint32_t u;
    std::memcpy(&u, bytes.data() + off, 4);
    const bool swap = big_endian_file != (std::endian::native == std::endian::big);
    return static_cast<std::int32_t>(swap ? detail::byteswap32(u) : u);
  };
  const Dims d{word(0), word(4), word(8)};
  const std::int32_t mode = word(12);
  const std::int32_t nsymbt = word(92);
  if (!d.valid()) throw IoError("MRC header has non-positive dims");
  if (mode != 2) throw IoError("unsupported MRC mode " + std::to_string(mode) + " (only mode 2 / float32)");
  if (nsymbt < 0) throw IoError("MRC header has negative extended header size");
  const std::size_t offset = 1024 + static_cast<std::size_t>(nsymbt);
  if (bytes.size() < offset + 4 * d.count()) throw IoError("size mismatch: MRC data truncated in " + path.string());
  Volume vol(d);
  auto out = vol.values();
  for (std::size_t n = 0; n < out.size(); ++n) {
    std::uint32_t u;
    std::memcpy(&u, bytes.data() + offset + 4 * n, 4);
    if (big_endian_file != (std::endian::native == std::endian::big)) u = detail::byteswap32(u);
    out[n] = std::bit_cast<float>(u);
  }
  if (!vol.all_finite()) throw IoError("non-finite values in " + path.string());
  return vol;
}

/// Writes z-slice `z` as binary PGM (P5), min-max scaled to 0..255.
inline void write_pgm_slice(const Volume& vol, int z, const std::filesystem::path& path) {
  const Dims d = vol.dims();
  if (z < 0 || z >= d.nz) throw InvalidArgument("slice " + std::to_string(z) + " outside 0.." + std::to_string(d.nz - 1));
  const std::size_t plane = static_cast<std::size_t>(d.nx) * d.ny;
  const auto slice = vol.values().subspan(plane * static_cast<std::size_t>(z), plane);
  const auto [lo, hi] = std::minmax_element(slice.begin(), slice.end());
  const double range = static_cast<double>(*hi) - *lo;
  std::string out = "P5\n" + std::to_string(d.nx) + " " + std::to_string(d.ny) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + plane);
  for (std::size_t n = 0; n < plane; ++n) {
    const double t = range > 0 ? (slice[n] - *lo) / range : 0.0;
    out[header + n] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t)));
  }
  detail::write_all(path, out.data(), out.size());
}

}  // namespace oft
