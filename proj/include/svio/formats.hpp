#pragma once

// Binary and text file formats: Middlebury .flo, PFM, 16-bit PNG disparity,
// 8-bit mask PNG, binary PLY and KITTI-style trajectory text.

#include <png.h>

#include <algorithm>
#include <bit>
#include <csetjmp>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "svio/error.hpp"
#include "svio/fusion_eval.hpp"
#include "svio/scene_flow.hpp"
#include "svio/stereo_geometry.hpp"

namespace svio {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "binary writers assume a little-endian host");

namespace detail {

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

template <typename T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <typename T>
T get(std::string_view data, std::size_t& pos, const fs::path& path) {
  if (pos + sizeof(T) > data.size()) {
    throw Error(ErrorKind::kFormat, path.string() + ": truncated payload");
  }
  T v;
  std::memcpy(&v, data.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

inline float byteswap_float(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  u = __builtin_bswap32(u);
  std::memcpy(&f, &u, 4);
  return f;
}

/// Shortest decimal that parses back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view tok, const std::string& file, long line) {
  double v = 0.0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
    throw ParseError(file, line, "not a number: '" + std::string(tok) + "'");
  }
  return v;
}

inline std::int64_t parse_int64(std::string_view tok, const std::string& file, long line) {
  std::int64_t v = 0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
    throw ParseError(file, line, "not an integer: '" + std::string(tok) + "'");
  }
  return v;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

inline std::vector<std::string_view> split_char(std::string_view s, char c) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  for (;;) {
    const auto e = s.find(c, b);
    out.push_back(s.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b));
    if (e == std::string_view::npos) break;
    b = e + 1;
  }
  return out;
}

/// Calls f(line_number, line) for each line, 1-based.
template <typename F>
void for_each_line(std::string_view text, F&& f) {
  long n = 0;
  std::size_t b = 0;
  while (b < text.size()) {
    auto e = text.find('\n', b);
    if (e == std::string_view::npos) e = text.size();
    f(++n, text.substr(b, e - b));
    b = e + 1;
  }
}

struct PngImage {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> pixels;  ///< single channel
};

// libpng reports errors by longjmp; the message is kept for the exception
// raised after the jump lands.
struct PngErrorSink {
  char message[256] = {0};
};

inline void png_on_error(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
  png_longjmp(png, 1);
}
inline void png_on_warning(png_structp, png_const_charp) {}

inline PngImage read_png_gray(const fs::path& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> guard(fp, &std::fclose);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorKind::kFormat, path.string() + ": not a PNG file");
  }
  PngErrorSink sink;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, png_on_error, png_on_warning);
  png_infop info = png_create_info_struct(png);
  PngImage img;
  std::vector<unsigned char> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::kFormat, path.string() + ": png: " + sink.message);
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.bit_depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (img.bit_depth != 8 && img.bit_depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::kFormat,
                path.string() + ": expected 8- or 16-bit single-channel PNG");
  }
  if (img.bit_depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  const std::size_t bpp = static_cast<std::size_t>(img.bit_depth / 8);
  row.resize(static_cast<std::size_t>(img.width) * bpp);
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < img.width; ++x) {
      std::uint16_t v = row[x * bpp];
      if (bpp == 2) std::memcpy(&v, &row[x * 2], 2);
      img.pixels[static_cast<std::size_t>(y) * img.width + x] = v;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void write_png_gray(const fs::path& path, const PngImage& img) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> guard(fp, &std::fclose);
  PngErrorSink sink;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_on_error, png_on_warning);
  png_infop info = png_create_info_struct(png);
  const std::size_t bpp = static_cast<std::size_t>(img.bit_depth / 8);
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * bpp);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::kIo, path.string() + ": png: " + sink.message);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width, img.height, img.bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // No time chunk, so identical inputs give identical bytes.
  png_write_info(png, info);
  if (img.bit_depth == 16) png_set_swap(png);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint16_t v = img.pixels[static_cast<std::size_t>(y) * img.width + x];
      if (bpp == 2) {
        std::memcpy(&row[x * 2], &v, 2);
      } else {
        row[x] = static_cast<unsigned char>(v);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

// ---------------------------------------------------------------- .flo

inline constexpr float kFloMagic = 202021.25f;
/// Middlebury "unknown flow" marker; components above this read as invalid.
inline constexpr float kFloUnknown = 1e10f;
inline constexpr float kFloUnknownThreshold = 1e9f;

/// Invalid pixels are written with the unknown-flow marker; valid and
/// dynamic pixels keep their vectors (rounded to float32).
inline void write_flo(const fs::path& path, const FlowField2D& f) {
  std::string out;
  out.reserve(12 + f.flow.size() * 8);
  detail::put(out, kFloMagic);
  detail::put(out, static_cast<std::int32_t>(f.width));
  detail::put(out, static_cast<std::int32_t>(f.height));
  for (std::size_t i = 0; i < f.flow.size(); ++i) {
    if (f.mask[i] == FlowMask::kInvalid) {
      detail::put(out, kFloUnknown);
      detail::put(out, kFloUnknown);
    } else {
      detail::put(out, static_cast<float>(f.flow[i].x()));
      detail::put(out, static_cast<float>(f.flow[i].y()));
    }
  }
  detail::write_file(path, out);
}

/// Unknown-flow pixels become invalid with zero flow, others valid.
inline FlowField2D read_flo(const fs::path& path) {
  const std::string data = detail::read_file(path);
  std::size_t pos = 0;
  const float magic = detail::get<float>(data, pos, path);
  if (magic != kFloMagic) {
    throw Error(ErrorKind::kFormat, path.string() + ": bad .flo magic");
  }
  const auto w = detail::get<std::int32_t>(data, pos, path);
  const auto h = detail::get<std::int32_t>(data, pos, path);
  if (w < 0 || h < 0 || static_cast<std::int64_t>(w) * h > (1LL << 28)) {
    throw Error(ErrorKind::kFormat, path.string() + ": bad .flo dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (data.size() != 12 + n * 8) {
    throw Error(ErrorKind::kFormat, path.string() + ": truncated or oversized .flo payload");
  }
  FlowField2D f(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    const float u = detail::get<float>(data, pos, path);
    const float v = detail::get<float>(data, pos, path);
    if (std::abs(u) > kFloUnknownThreshold || std::abs(v) > kFloUnknownThreshold ||
        !std::isfinite(u) || !std::isfinite(v)) {
      continue;
    }
    f.flow[i] = Vec2(u, v);
    f.mask[i] = FlowMask::kValid;
  }
  return f;
}

/// Tri-state mask sidecar as 8-bit PNG (0 invalid, 128 dynamic, 255 valid).
inline void write_mask_png(const fs::path& path, const FlowField2D& f) {
  detail::PngImage img{f.width, f.height, 8, {}};
  img.pixels.reserve(f.mask.size());
  for (auto m : f.mask) img.pixels.push_back(static_cast<std::uint8_t>(m));
  detail::write_png_gray(path, img);
}

inline std::vector<FlowMask> read_mask_png(const fs::path& path, int width, int height) {
  const detail::PngImage img = detail::read_png_gray(path);
  if (img.bit_depth != 8 || img.width != width || img.height != height) {
    throw Error(ErrorKind::kFormat, path.string() + ": mask size or depth mismatch");
  }
  std::vector<FlowMask> out;
  out.reserve(img.pixels.size());
  for (auto v : img.pixels) {
    if (v != 0 && v != 128 && v != 255) {
      throw Error(ErrorKind::kFormat,
                  path.string() + ": mask value " + std::to_string(v) + " not in {0,128,255}");
    }
    out.push_back(static_cast<FlowMask>(v));
  }
  return out;
}

/// .flo plus mask sidecar. Dynamic pixels are restored from the mask.
inline FlowField2D read_flow_with_mask(const fs::path& flo, const fs::path& mask) {
  FlowField2D f = read_flo(flo);
  f.mask = read_mask_png(mask, f.width, f.height);
  return f;
}

// ---------------------------------------------------------------- disparity

/// KITTI convention: value / 256 px, 0 = invalid.
inline DisparityMap read_disparity_png16(const fs::path& path) {
  const detail::PngImage img = detail::read_png_gray(path);
  if (img.bit_depth != 16) {
    throw Error(ErrorKind::kFormat, path.string() + ": disparity PNG must be 16-bit");
  }
  DisparityMap d(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.pixels[i] > 0) {
      d.values[i] = img.pixels[i] / 256.0;
      d.valid[i] = 1;
    }
  }
  return d;
}

inline void write_disparity_png16(const fs::path& path, const DisparityMap& d) {
  detail::PngImage img{d.width, d.height, 16, {}};
  img.pixels.resize(d.values.size(), 0);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!d.valid[i]) continue;
    const double q = std::round(d.values[i] * 256.0);
    img.pixels[i] = static_cast<std::uint16_t>(std::clamp(q, 1.0, 65535.0));
  }
  detail::write_png_gray(path, img);
}

/// Single-channel PFM ("Pf"), either endianness. Rows are stored bottom-up.
/// Non-finite or non-positive values read as invalid.
inline DisparityMap read_pfm(const fs::path& path) {
  const std::string data = detail::read_file(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    const std::size_t b = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (b == pos) throw Error(ErrorKind::kFormat, path.string() + ": truncated PFM header");
    return std::string_view(data).substr(b, pos - b);
  };
  const auto kind = token();
  if (kind != "Pf") {
    throw Error(ErrorKind::kFormat,
                path.string() + ": expected single-channel PFM ('Pf'), got '" +
                    std::string(kind) + "'");
  }
  double w = 0, h = 0, scale = 0;
  try {
    w = detail::parse_double(token(), path.string(), 0);
    h = detail::parse_double(token(), path.string(), 0);
    scale = detail::parse_double(token(), path.string(), 0);
  } catch (const ParseError& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
  if (w < 0 || h < 0 || w != std::floor(w) || h != std::floor(h) || w * h > (1 << 28) ||
      scale == 0.0) {
    throw Error(ErrorKind::kFormat, path.string() + ": bad PFM header");
  }
  ++pos;  // single whitespace after scale
  const bool little = scale < 0;
  const int wi = static_cast<int>(w), hi = static_cast<int>(h);
  const std::size_t n = static_cast<std::size_t>(wi) * hi;
  if (data.size() - std::min(pos, data.size()) != n * 4) {
    throw Error(ErrorKind::kFormat, path.string() + ": PFM payload size mismatch");
  }
  DisparityMap d(wi, hi);
  for (int row = hi - 1; row >= 0; --row) {
    for (int x = 0; x < wi; ++x) {
      float v = detail::get<float>(data, pos, path);
      if (!little) v = detail::byteswap_float(v);
      if (std::isfinite(v) && v > 0.0f) d.set(x, row, v);
    }
  }
  return d;
}

/// Little-endian PFM; invalid pixels written as 0.
inline void write_pfm(const fs::path& path, const DisparityMap& d) {
  std::string out = "Pf\n" + std::to_string(d.width) + " " + std::to_string(d.height) +
                    "\n-1\n";
  for (int row = d.height - 1; row >= 0; --row) {
    for (int x = 0; x < d.width; ++x) {
      detail::put(out, d.is_valid(x, row) ? static_cast<float>(d.at(x, row)) : 0.0f);
    }
  }
  detail::write_file(path, out);
}

/// Dispatch on extension (.png or .pfm).
inline DisparityMap read_disparity(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png") return read_disparity_png16(path);
  if (ext == ".pfm") return read_pfm(path);
  throw Error(ErrorKind::kFormat, path.string() + ": unknown disparity extension");
}

// ---------------------------------------------------------------- PLY

/// Binary little-endian PLY: float x y z, uint u v.
inline void write_ply(const fs::path& path, const PointCloud& c) {
  std::string out =
      "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(c.size()) +
      "\nproperty float x\nproperty float y\nproperty float z\n"
      "property uint u\nproperty uint v\nend_header\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 3; ++k) detail::put(out, static_cast<float>(c.points[i][k]));
    detail::put(out, c.source_pixel[i].u);
    detail::put(out, c.source_pixel[i].v);
  }
  detail::write_file(path, out);
}

/// 3D flow as PLY: anchor x y z, flow dx dy dz, pixel u v, dynamic flag.
inline void write_flow_ply(const fs::path& path, const FlowField3D& f) {
  std::string out =
      "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(f.size()) +
      "\nproperty float x\nproperty float y\nproperty float z\n"
      "property float dx\nproperty float dy\nproperty float dz\n"
      "property uint u\nproperty uint v\nproperty uchar dynamic\nend_header\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int k = 0; k < 3; ++k) detail::put(out, static_cast<float>(f.anchors[i][k]));
    for (int k = 0; k < 3; ++k) detail::put(out, static_cast<float>(f.vectors[i][k]));
    detail::put(out, f.pixels[i].u);
    detail::put(out, f.pixels[i].v);
    detail::put(out, f.dynamic[i]);
  }
  detail::write_file(path, out);
}

/// Reads the point-cloud layout written by write_ply.
inline PointCloud read_ply(const fs::path& path) {
  const std::string data = detail::read_file(path);
  const auto end = data.find("end_header\n");
  if (data.rfind("ply\n", 0) != 0 || end == std::string::npos) {
    throw Error(ErrorKind::kFormat, path.string() + ": not a PLY file");
  }
  std::size_t count = 0;
  bool have_count = false;
  std::vector<std::string> props;
  bool binary_le = false;
  detail::for_each_line(std::string_view(data).substr(0, end), [&](long, std::string_view l) {
    const auto t = detail::split_ws(l);
    if (t.size() >= 2 && t[0] == "format") binary_le = t[1] == "binary_little_endian";
    if (t.size() == 3 && t[0] == "element" && t[1] == "vertex") {
      try {
        count = static_cast<std::size_t>(detail::parse_int64(t[2], path.string(), 0));
      } catch (const ParseError&) {
        throw Error(ErrorKind::kFormat, path.string() + ": bad vertex count");
      }
      have_count = true;
    }
    if (t.size() == 3 && t[0] == "property") props.push_back(std::string(t[1]) + " " + std::string(t[2]));
  });
  const std::vector<std::string> expected = {"float x", "float y", "float z", "uint u",
                                             "uint v"};
  if (!binary_le || !have_count || props != expected) {
    throw Error(ErrorKind::kFormat,
                path.string() + ": expected binary little-endian x,y,z float + u,v uint");
  }
  std::size_t pos = end + std::strlen("end_header\n");
  if (data.size() - pos != count * 20) {
    throw Error(ErrorKind::kFormat, path.string() + ": PLY payload size mismatch");
  }
  PointCloud c;
  c.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 p;
    for (int k = 0; k < 3; ++k) p[k] = detail::get<float>(data, pos, path);
    PixelCoord px;
    px.u = detail::get<std::uint32_t>(data, pos, path);
    px.v = detail::get<std::uint32_t>(data, pos, path);
    c.push_back(p, px);
  }
  return c;
}

// ---------------------------------------------------------------- trajectories

inline std::string pose_row(const RigidTransform& t) {
  std::string s;
  const Mat34 m = t.matrix34();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!s.empty()) s += ' ';
      s += detail::shortest(m(r, c));
    }
  }
  return s;
}

/// Largest |R^T R - I| entry accepted from text before projection.
inline constexpr double kPoseTextTol = 1e-3;

/// 12 numbers, row-major 3x4 [R|t]. Non-orthonormal rotations (text
/// precision) are projected to the nearest rotation.
inline RigidTransform parse_pose_row(std::span<const std::string_view> tok,
                                     const std::string& file, long line) {
  if (tok.size() != 12) {
    throw ParseError(file, line, "expected 12 pose values, got " + std::to_string(tok.size()));
  }
  Mat3 r;
  Vec3 t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = detail::parse_double(tok[i * 4 + j], file, line);
    t[i] = detail::parse_double(tok[i * 4 + 3], file, line);
  }
  if (!r.allFinite() || !t.allFinite() || orthonormality_error(r) > kPoseTextTol ||
      !(r.determinant() > 0.0)) {
    throw ParseError(file, line, "pose rotation block is not a rotation");
  }
  try {
    return RigidTransform{Rotation::from_matrix_or_nearest(r), t};
  } catch (const Error& e) {
    throw ParseError(file, line, e.what());
  }
}

/// KITTI poses file: one 12-value row per pose, no timestamps.
inline std::string format_kitti_poses(const Trajectory& tr) {
  std::string out;
  for (const auto& e : tr.entries) out += pose_row(e.pose) + "\n";
  return out;
}

/// Timestamped variant: seconds followed by 12 values.
inline std::string format_timed_poses(const Trajectory& tr) {
  std::string out;
  for (const auto& e : tr.entries) out += detail::shortest(e.t) + " " + pose_row(e.pose) + "\n";
  return out;
}

inline void write_kitti_poses(const fs::path& path, const Trajectory& tr) {
  detail::write_file(path, format_kitti_poses(tr));
}

inline void write_timed_poses(const fs::path& path, const Trajectory& tr) {
  detail::write_file(path, format_timed_poses(tr));
}

/// Reads 12- or 13-value rows. Untimed rows get t = index * default_dt
/// unless `times` supplies one timestamp per row.
inline Trajectory read_trajectory(const fs::path& path, std::span<const double> times = {},
                                  double default_dt = 0.1) {
  const std::string text = detail::read_file(path);
  Trajectory tr;
  detail::for_each_line(text, [&](long n, std::string_view line) {
    const auto tok = detail::split_ws(line);
    if (tok.empty()) return;
    double t = 0.0;
    RigidTransform pose;
    if (tok.size() == 13) {
      t = detail::parse_double(tok[0], path.string(), n);
      pose = parse_pose_row(std::span(tok).subspan(1), path.string(), n);
    } else {
      pose = parse_pose_row(tok, path.string(), n);
      const std::size_t k = tr.size();
      if (!times.empty()) {
        if (k >= times.size()) throw ParseError(path.string(), n, "more poses than timestamps");
        t = times[k];
      } else {
        t = static_cast<double>(k) * default_dt;
      }
    }
    if (!tr.empty() && !(t > tr.entries.back().t)) {
      throw ParseError(path.string(), n, "timestamps not strictly increasing");
    }
    tr.entries.push_back({t, pose});
  });
  if (!times.empty() && tr.size() != times.size()) {
    throw ParseError(path.string(), 0,
                     "pose count " + std::to_string(tr.size()) + " != timestamp count " +
                         std::to_string(times.size()));
  }
  return tr;
}

}  // namespace svio
