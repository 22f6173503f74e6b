#pragma once

// KITTI odometry, KITTI raw OXTS and EuRoC ASL dataset layouts.

#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svio/formats.hpp"
#include "svio/fusion_eval.hpp"
#include "svio/imu.hpp"
#include "svio/stereo_geometry.hpp"

namespace svio {

/// One stereo sequence. Frame lists are parallel; ground truth, when
/// present, holds one world-from-body pose per frame.
struct SequenceManifest {
  std::string layout;  ///< "kitti" or "euroc"
  fs::path root;
  std::string sequence;
  std::vector<std::int64_t> frame_t_ns;
  std::vector<fs::path> left_images;
  std::vector<fs::path> right_images;
  std::vector<fs::path> disparity;
  std::vector<ImuSample> imu;
  std::optional<Trajectory> ground_truth;
  std::vector<Vec3> gt_velocity;  ///< world frame, per frame; empty if unknown
  StereoRig rig;

  std::size_t size() const { return frame_t_ns.size(); }
  double frame_time(std::size_t i) const { return ns_to_seconds(frame_t_ns[i]); }

  void validate() const {
    const std::size_t n = frame_t_ns.size();
    if (left_images.size() != n || right_images.size() != n || disparity.size() != n) {
      throw Error(ErrorKind::kInvalidArgument, "manifest frame lists differ in length");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (frame_t_ns[i] <= frame_t_ns[i - 1]) {
        throw Error(ErrorKind::kMalformedStream,
                    "frame timestamps not strictly increasing at frame " + std::to_string(i));
      }
    }
    if (ground_truth && ground_truth->size() != n) {
      throw Error(ErrorKind::kInvalidArgument, "ground truth does not cover every frame");
    }
    if (!gt_velocity.empty() && gt_velocity.size() != n) {
      throw Error(ErrorKind::kInvalidArgument, "ground-truth velocity does not cover every frame");
    }
  }
};

namespace detail {

inline void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw ParseError(p.string(), 0, "missing file");
}

inline std::int64_t seconds_text_to_ns(std::string_view tok, const std::string& file, long line) {
  const double t = parse_double(tok, file, line);
  if (!std::isfinite(t)) throw ParseError(file, line, "non-finite timestamp");
  return seconds_to_ns(t);
}

inline std::string ns_to_seconds_text(std::int64_t ns) {
  return shortest(ns_to_seconds(ns));
}

}  // namespace detail

// ---------------------------------------------------------------- KITTI odometry

struct KittiOptions {
  std::string left_dir = "image_2";
  std::string right_dir = "image_3";
  std::string left_projection = "P2";
  std::string right_projection = "P3";
  RigidTransform cam_to_imu;
  int width = 0;
  int height = 0;
  /// Raw-drive OXTS directory for this sequence (explicit mapping). Empty:
  /// look for sequences/<id>/oxts, else no IMU.
  fs::path oxts_root;
  std::int64_t oxts_time_offset_ns = 0;  ///< subtracted from OXTS timestamps
};

using ProjectionMatrix = Eigen::Matrix<double, 3, 4, Eigen::RowMajor>;

inline std::map<std::string, ProjectionMatrix> parse_kitti_calib(const fs::path& path) {
  const std::string text = detail::read_file(path);
  std::map<std::string, ProjectionMatrix> out;
  detail::for_each_line(text, [&](long n, std::string_view line) {
    line = detail::trim(line);
    if (line.empty()) return;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(path.string(), n, "expected 'key: values'");
    const auto tok = detail::split_ws(line.substr(colon + 1));
    if (tok.size() != 12) {
      throw ParseError(path.string(), n, "expected 12 values, got " + std::to_string(tok.size()));
    }
    ProjectionMatrix p;
    for (int i = 0; i < 12; ++i) p(i / 4, i % 4) = detail::parse_double(tok[i], path.string(), n);
    out[std::string(detail::trim(line.substr(0, colon)))] = p;
  });
  return out;
}

/// Intrinsics from the left projection matrix; baseline from the difference
/// of the -fx*b entries of the two projections.
inline StereoRig rig_from_projections(const ProjectionMatrix& left, const ProjectionMatrix& right,
                                      const KittiOptions& opt) {
  StereoRig rig;
  rig.intrinsics = {left(0, 0), left(1, 1), left(0, 2), left(1, 2)};
  rig.baseline = (left(0, 3) - right(0, 3)) / left(0, 0);
  rig.cam_to_imu = opt.cam_to_imu;
  rig.width = opt.width;
  rig.height = opt.height;
  return rig;
}

inline std::vector<std::int64_t> parse_kitti_times(const fs::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<std::int64_t> out;
  detail::for_each_line(text, [&](long n, std::string_view line) {
    line = detail::trim(line);
    if (line.empty()) return;
    const auto ns = detail::seconds_text_to_ns(line, path.string(), n);
    if (!out.empty() && ns <= out.back()) {
      throw ParseError(path.string(), n, "timestamps not strictly increasing");
    }
    out.push_back(ns);
  });
  return out;
}

// OXTS record: 30 space-separated values. Offsets follow the raw devkit
// dataformat: ax ay az at 11-13, wx wy wz at 17-19 (vehicle body frame).
inline constexpr std::size_t kOxtsFields = 30;
inline constexpr std::size_t kOxtsAx = 11;
inline constexpr std::size_t kOxtsWx = 17;

/// "YYYY-MM-DD HH:MM:SS.fffffffff" to ns since the Unix epoch (UTC).
inline std::int64_t parse_oxts_timestamp(std::string_view s, const std::string& file, long line) {
  s = detail::trim(s);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  int consumed = 0;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2d-%2d %2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &sec,
                  &consumed) != 6) {
    throw ParseError(file, line, "bad timestamp '" + str + "'");
  }
  std::int64_t frac = 0;
  std::string_view rest = s.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty()) {
    if (rest[0] != '.' || rest.size() < 2 || rest.size() > 10) {
      throw ParseError(file, line, "bad fractional seconds '" + str + "'");
    }
    std::string digits(rest.substr(1));
    digits.resize(9, '0');
    frac = detail::parse_int64(digits, file, line);
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) {
    throw ParseError(file, line, "invalid date/time '" + str + "'");
  }
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return ((days * 24 + h) * 60 + mi) * 60'000'000'000LL + sec * 1'000'000'000LL + frac;
}

inline std::string format_oxts_timestamp(std::int64_t ns) {
  using namespace std::chrono;
  std::int64_t day_ns = 86'400'000'000'000LL;
  std::int64_t days = ns / day_ns;
  std::int64_t rem = ns % day_ns;
  if (rem < 0) {
    rem += day_ns;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  const std::int64_t s = rem / 1'000'000'000LL;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02lld:%02lld:%02lld.%09lld",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long long>(s / 3600),
                static_cast<long long>(s / 60 % 60), static_cast<long long>(s % 60),
                static_cast<long long>(rem % 1'000'000'000LL));
  return buf;
}

inline ImuSample parse_oxts_line(std::string_view line, std::int64_t t_ns, const std::string& file,
                                 long n) {
  const auto tok = detail::split_ws(detail::trim(line));
  if (tok.size() != kOxtsFields) {
    throw ParseError(file, n, "expected " + std::to_string(kOxtsFields) + " fields, got " +
                                  std::to_string(tok.size()));
  }
  std::vector<double> v;
  v.reserve(kOxtsFields);
  for (auto t : tok) v.push_back(detail::parse_double(t, file, n));
  return ImuSample{t_ns, Vec3(v[kOxtsWx], v[kOxtsWx + 1], v[kOxtsWx + 2]),
                   Vec3(v[kOxtsAx], v[kOxtsAx + 1], v[kOxtsAx + 2])};
}

/// oxts/timestamps.txt plus oxts/data/%010d.txt (one record per file).
inline std::vector<ImuSample> parse_kitti_oxts(const fs::path& root,
                                               std::int64_t time_offset_ns = 0) {
  const fs::path ts_path = root / "timestamps.txt";
  detail::require_file(ts_path);
  const std::string ts_text = detail::read_file(ts_path);
  std::vector<std::int64_t> stamps;
  detail::for_each_line(ts_text, [&](long n, std::string_view line) {
    if (detail::trim(line).empty()) return;
    const auto t = parse_oxts_timestamp(line, ts_path.string(), n) - time_offset_ns;
    if (!stamps.empty() && t <= stamps.back()) {
      throw ParseError(ts_path.string(), n, "timestamps not strictly increasing");
    }
    stamps.push_back(t);
  });
  std::vector<ImuSample> out;
  out.reserve(stamps.size());
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%010zu.txt", i);
    const fs::path p = root / "data" / name;
    detail::require_file(p);
    const std::string text = detail::read_file(p);
    std::optional<ImuSample> s;
    detail::for_each_line(text, [&](long n, std::string_view line) {
      if (detail::trim(line).empty()) return;
      if (s) throw ParseError(p.string(), n, "more than one record");
      s = parse_oxts_line(line, stamps[i], p.string(), n);
    });
    if (!s) throw ParseError(p.string(), 0, "empty record");
    out.push_back(*s);
  }
  return out;
}

inline void write_kitti_oxts(const fs::path& root, std::span<const ImuSample> samples) {
  std::string ts;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    ts += format_oxts_timestamp(s.t_ns) + "\n";
    std::vector<double> v(kOxtsFields, 0.0);
    for (int k = 0; k < 3; ++k) {
      v[kOxtsAx + k] = s.accel[k];
      v[kOxtsWx + k] = s.gyro[k];
    }
    std::string line;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k) line += ' ';
      line += detail::shortest(v[k]);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "%010zu.txt", i);
    detail::write_file(root / "data" / name, line + "\n");
  }
  detail::write_file(root / "timestamps.txt", ts);
}

inline void write_kitti_calib(const fs::path& path, const StereoRig& rig) {
  const auto& k = rig.intrinsics;
  auto row = [&](double tx) {
    ProjectionMatrix p = ProjectionMatrix::Zero();
    p(0, 0) = k.fx;
    p(0, 2) = k.cx;
    p(1, 1) = k.fy;
    p(1, 2) = k.cy;
    p(2, 2) = 1.0;
    p(0, 3) = tx;
    std::string s;
    for (int i = 0; i < 12; ++i) s += " " + detail::shortest(p(i / 4, i % 4));
    return s;
  };
  const std::string left = row(0.0), right = row(-k.fx * rig.baseline);
  detail::write_file(path, "P0:" + left + "\nP1:" + right + "\nP2:" + left + "\nP3:" + right + "\n");
}

inline void write_kitti_times(const fs::path& path, std::span<const std::int64_t> t_ns) {
  std::string out;
  for (auto t : t_ns) out += detail::ns_to_seconds_text(t) + "\n";
  detail::write_file(path, out);
}

inline fs::path kitti_disparity_path(const fs::path& seq_dir, std::size_t i,
                                     const std::string& ext) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06zu", i);
  return seq_dir / "disparity" / (name + ext);
}

/// <root>/sequences/<id>/{calib.txt,times.txt,image_2,image_3,disparity}
/// plus optional <root>/poses/<id>.txt (left-camera poses).
inline SequenceManifest parse_kitti_odometry(const fs::path& root, const std::string& sequence,
                                             const KittiOptions& opt = {}) {
  const fs::path seq = root / "sequences" / sequence;
  detail::require_file(seq / "calib.txt");
  detail::require_file(seq / "times.txt");
  SequenceManifest m;
  m.layout = "kitti";
  m.root = root;
  m.sequence = sequence;
  const auto calib = parse_kitti_calib(seq / "calib.txt");
  for (const auto& key : {opt.left_projection, opt.right_projection}) {
    if (!calib.count(key)) {
      throw ParseError((seq / "calib.txt").string(), 0, "missing projection " + key);
    }
  }
  m.rig = rig_from_projections(calib.at(opt.left_projection), calib.at(opt.right_projection), opt);
  try {
    m.rig.validate();
  } catch (const Error& e) {
    throw ParseError((seq / "calib.txt").string(), 0, e.what());
  }
  m.frame_t_ns = parse_kitti_times(seq / "times.txt");
  for (std::size_t i = 0; i < m.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.png", i);
    m.left_images.push_back(seq / opt.left_dir / name);
    m.right_images.push_back(seq / opt.right_dir / name);
    const fs::path png = kitti_disparity_path(seq, i, ".png");
    m.disparity.push_back(fs::exists(png) ? png : kitti_disparity_path(seq, i, ".pfm"));
  }
  const fs::path poses = root / "poses" / (sequence + ".txt");
  if (fs::exists(poses)) {
    std::vector<double> times;
    for (auto t : m.frame_t_ns) times.push_back(ns_to_seconds(t));
    Trajectory cam = read_trajectory(poses, times);
    const RigidTransform imu_to_cam = opt.cam_to_imu.inverse();
    for (auto& e : cam.entries) e.pose = e.pose * imu_to_cam;
    m.ground_truth = std::move(cam);
  }
  const fs::path oxts = opt.oxts_root.empty() ? seq / "oxts" : opt.oxts_root;
  if (fs::exists(oxts / "timestamps.txt")) m.imu = parse_kitti_oxts(oxts, opt.oxts_time_offset_ns);
  m.validate();
  return m;
}

// ---------------------------------------------------------------- EuRoC

namespace detail {

/// Column names of an ASL CSV header with units and '#' stripped.
inline std::vector<std::string> csv_header_keys(std::string_view header) {
  std::vector<std::string> keys;
  header = trim(header);
  if (!header.empty() && header[0] == '#') header.remove_prefix(1);
  for (auto col : split_char(header, ',')) {
    col = trim(col);
    const auto br = col.find('[');
    keys.emplace_back(trim(col.substr(0, br)));
  }
  return keys;
}

/// Reads an ASL CSV with the given leading column names. Calls
/// f(row_number, fields) per non-empty data row.
template <typename F>
void read_asl_csv(const fs::path& path, const std::vector<std::string>& expected, F&& f) {
  require_file(path);
  const std::string text = read_file(path);
  bool header = true;
  for_each_line(text, [&](long n, std::string_view line) {
    if (header) {
      header = false;
      auto keys = csv_header_keys(line);
      if (keys.size() < expected.size() ||
          !std::equal(expected.begin(), expected.end(), keys.begin())) {
        throw ParseError(path.string(), n, "CSV header mismatch");
      }
      return;
    }
    if (trim(line).empty()) return;
    auto fields = split_char(trim(line), ',');
    for (auto& x : fields) x = trim(x);
    if (fields.size() < expected.size()) {
      throw ParseError(path.string(), n,
                       "expected " + std::to_string(expected.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    f(n, fields);
  });
  if (header) throw ParseError(path.string(), 0, "missing CSV header");
}

}  // namespace detail

inline const std::vector<std::string> kEurocImuColumns = {
    "timestamp", "w_RS_S_x", "w_RS_S_y", "w_RS_S_z", "a_RS_S_x", "a_RS_S_y", "a_RS_S_z"};
inline const std::vector<std::string> kEurocCamColumns = {"timestamp", "filename"};
inline const std::vector<std::string> kEurocGtColumns = {
    "timestamp", "p_RS_R_x", "p_RS_R_y", "p_RS_R_z", "q_RS_w", "q_RS_x",
    "q_RS_y",    "q_RS_z",   "v_RS_R_x", "v_RS_R_y", "v_RS_R_z"};

inline std::vector<ImuSample> parse_euroc_imu(const fs::path& path) {
  std::vector<ImuSample> out;
  detail::read_asl_csv(path, kEurocImuColumns, [&](long n, const auto& f) {
    ImuSample s;
    s.t_ns = detail::parse_int64(f[0], path.string(), n);
    for (int k = 0; k < 3; ++k) {
      s.gyro[k] = detail::parse_double(f[1 + k], path.string(), n);
      s.accel[k] = detail::parse_double(f[4 + k], path.string(), n);
    }
    if (!out.empty() && s.t_ns <= out.back().t_ns) {
      throw ParseError(path.string(), n, "timestamps not strictly increasing");
    }
    out.push_back(s);
  });
  return out;
}

inline void write_euroc_imu(const fs::path& path, std::span<const ImuSample> samples) {
  std::string out =
      "#timestamp [ns],w_RS_S_x [rad s^-1],w_RS_S_y [rad s^-1],w_RS_S_z [rad s^-1],"
      "a_RS_S_x [m s^-2],a_RS_S_y [m s^-2],a_RS_S_z [m s^-2]\n";
  for (const auto& s : samples) {
    out += std::to_string(s.t_ns);
    for (int k = 0; k < 3; ++k) out += "," + detail::shortest(s.gyro[k]);
    for (int k = 0; k < 3; ++k) out += "," + detail::shortest(s.accel[k]);
    out += "\n";
  }
  detail::write_file(path, out);
}

struct EurocCamEntry {
  std::int64_t t_ns = 0;
  std::string filename;
};

inline std::vector<EurocCamEntry> parse_euroc_cam(const fs::path& path) {
  std::vector<EurocCamEntry> out;
  detail::read_asl_csv(path, kEurocCamColumns, [&](long n, const auto& f) {
    EurocCamEntry e{detail::parse_int64(f[0], path.string(), n), std::string(f[1])};
    if (!out.empty() && e.t_ns <= out.back().t_ns) {
      throw ParseError(path.string(), n, "timestamps not strictly increasing");
    }
    out.push_back(std::move(e));
  });
  return out;
}

inline void write_euroc_cam(const fs::path& path, std::span<const std::int64_t> t_ns) {
  std::string out = "#timestamp [ns],filename\n";
  for (auto t : t_ns) out += std::to_string(t) + "," + std::to_string(t) + ".png\n";
  detail::write_file(path, out);
}

struct EurocGtRow {
  std::int64_t t_ns = 0;
  RigidTransform pose;  ///< world from body
  Vec3 velocity = Vec3::Zero();
  Vec3 bg = Vec3::Zero();
  Vec3 ba = Vec3::Zero();
};

inline std::vector<EurocGtRow> parse_euroc_groundtruth(const fs::path& path) {
  std::vector<EurocGtRow> out;
  detail::read_asl_csv(path, kEurocGtColumns, [&](long n, const auto& f) {
    std::vector<double> v;
    for (std::size_t k = 1; k < f.size(); ++k) v.push_back(detail::parse_double(f[k], path.string(), n));
    EurocGtRow r;
    r.t_ns = detail::parse_int64(f[0], path.string(), n);
    const Eigen::Quaterniond q(v[3], v[4], v[5], v[6]);
    if (!(q.norm() > 0.5)) throw ParseError(path.string(), n, "degenerate quaternion");
    r.pose = RigidTransform{Rotation::from_quaternion(q), Vec3(v[0], v[1], v[2])};
    r.velocity = Vec3(v[7], v[8], v[9]);
    if (v.size() >= 16) {
      r.bg = Vec3(v[10], v[11], v[12]);
      r.ba = Vec3(v[13], v[14], v[15]);
    }
    if (!out.empty() && r.t_ns <= out.back().t_ns) {
      throw ParseError(path.string(), n, "timestamps not strictly increasing");
    }
    out.push_back(r);
  });
  return out;
}

inline void write_euroc_groundtruth(const fs::path& path, std::span<const EurocGtRow> rows) {
  std::string out =
      "#timestamp, p_RS_R_x [m], p_RS_R_y [m], p_RS_R_z [m], q_RS_w [], q_RS_x [], q_RS_y [], "
      "q_RS_z [], v_RS_R_x [m s^-1], v_RS_R_y [m s^-1], v_RS_R_z [m s^-1], b_w_RS_S_x [rad s^-1], "
      "b_w_RS_S_y [rad s^-1], b_w_RS_S_z [rad s^-1], b_a_RS_S_x [m s^-2], b_a_RS_S_y [m s^-2], "
      "b_a_RS_S_z [m s^-2]\n";
  for (const auto& r : rows) {
    const Eigen::Quaterniond q(r.pose.rotation.matrix());
    const double vals[] = {r.pose.translation.x(), r.pose.translation.y(), r.pose.translation.z(),
                           q.w(), q.x(), q.y(), q.z(),
                           r.velocity.x(), r.velocity.y(), r.velocity.z(),
                           r.bg.x(), r.bg.y(), r.bg.z(), r.ba.x(), r.ba.y(), r.ba.z()};
    out += std::to_string(r.t_ns);
    for (double v : vals) out += "," + detail::shortest(v);
    out += "\n";
  }
  detail::write_file(path, out);
}

/// Ground-truth pose and velocity at t_ns: exact row, or interpolation
/// (slerp / linear) between the bracketing rows.
inline std::optional<EurocGtRow> euroc_gt_at(std::span<const EurocGtRow> rows, std::int64_t t_ns) {
  const auto it = std::lower_bound(rows.begin(), rows.end(), t_ns,
                                   [](const EurocGtRow& r, std::int64_t t) { return r.t_ns < t; });
  if (it == rows.end()) return std::nullopt;
  if (it->t_ns == t_ns) return *it;
  if (it == rows.begin()) return std::nullopt;
  const auto& a = *(it - 1);
  const auto& b = *it;
  const double u = static_cast<double>(t_ns - a.t_ns) / static_cast<double>(b.t_ns - a.t_ns);
  EurocGtRow r;
  r.t_ns = t_ns;
  r.pose.rotation = a.pose.rotation * so3_exp(u * so3_log(a.pose.rotation.inverse() * b.pose.rotation));
  r.pose.translation = (1 - u) * a.pose.translation + u * b.pose.translation;
  r.velocity = (1 - u) * a.velocity + u * b.velocity;
  r.bg = (1 - u) * a.bg + u * b.bg;
  r.ba = (1 - u) * a.ba + u * b.ba;
  return r;
}

/// mav0/{imu0,cam0,cam1,state_groundtruth_estimate0}/data.csv. Disparity is
/// read from mav0/disparity0/<timestamp>.png or .pfm. Calibration comes from
/// the caller (run config), not the sensor YAML files.
inline SequenceManifest parse_euroc(const fs::path& root, const StereoRig& rig) {
  const fs::path mav = root / "mav0";
  SequenceManifest m;
  m.layout = "euroc";
  m.root = root;
  m.rig = rig;
  m.imu = parse_euroc_imu(mav / "imu0" / "data.csv");
  const auto cam0 = parse_euroc_cam(mav / "cam0" / "data.csv");
  std::vector<EurocCamEntry> cam1;
  if (fs::exists(mav / "cam1" / "data.csv")) cam1 = parse_euroc_cam(mav / "cam1" / "data.csv");
  for (std::size_t i = 0; i < cam0.size(); ++i) {
    const auto& e = cam0[i];
    m.frame_t_ns.push_back(e.t_ns);
    m.left_images.push_back(mav / "cam0" / "data" / e.filename);
    m.right_images.push_back(mav / "cam1" / "data" /
                             (i < cam1.size() ? cam1[i].filename : e.filename));
    const fs::path png = mav / "disparity0" / (std::to_string(e.t_ns) + ".png");
    m.disparity.push_back(fs::exists(png) ? png
                                          : mav / "disparity0" / (std::to_string(e.t_ns) + ".pfm"));
  }
  const fs::path gt = mav / "state_groundtruth_estimate0" / "data.csv";
  if (fs::exists(gt)) {
    const auto rows = parse_euroc_groundtruth(gt);
    Trajectory tr;
    std::vector<Vec3> vel;
    for (auto t : m.frame_t_ns) {
      const auto r = euroc_gt_at(rows, t);
      if (!r) break;
      tr.entries.push_back({ns_to_seconds(t), r->pose});
      vel.push_back(r->velocity);
    }
    // Ground truth is attached only when it covers every frame.
    if (tr.size() == m.size()) {
      m.ground_truth = std::move(tr);
      m.gt_velocity = std::move(vel);
    }
  }
  m.validate();
  return m;
}

}  // namespace svio
