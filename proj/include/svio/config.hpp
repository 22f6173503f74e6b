#pragma once

// Run configuration: INI-style "[section]" headers and "key = value" lines,
// '#' comments. Unknown sections or keys are rejected. After the file,
// environment variables SVIO_<SECTION>_<KEY> override individual keys.

#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "svio/dataset_io.hpp"
#include "svio/degradation.hpp"
#include "svio/formats.hpp"
#include "svio/fusion_eval.hpp"
#include "svio/icp.hpp"
#include "svio/imu.hpp"
#include "svio/scene_flow.hpp"
#include "svio/status_update.hpp"
#include "svio/synth_world.hpp"

namespace svio {

struct SynthSettings {
  std::string trajectory = "vehicle";  ///< vehicle | circle | line
  double duration = 60.0;              ///< s
  double speed = 10.0;                 ///< m/s (vehicle, line); circle radius = speed / omega
  double circle_omega = 0.1;           ///< rad/s
  SceneConfig scene;
  Vec3 bias_bg = Vec3::Zero();
  Vec3 bias_ba = Vec3::Zero();
  bool imu_noise = false;

  void validate() const {
    if (trajectory != "vehicle" && trajectory != "circle" && trajectory != "line") {
      throw Error(ErrorKind::kConfig, "synth.trajectory must be vehicle, circle or line");
    }
    if (!(duration > 0.0) || !(speed > 0.0) || !(circle_omega > 0.0)) {
      throw Error(ErrorKind::kConfig, "synth duration, speed and circle_omega must be > 0");
    }
    if (!(scene.imu_rate > 0.0) || !(scene.cam_rate > 0.0)) {
      throw Error(ErrorKind::kConfig, "synth imu_rate and cam_rate must be > 0");
    }
    if (!(scene.shell_inner >= 0.0) || !(scene.shell_inner < scene.shell_outer)) {
      throw Error(ErrorKind::kConfig, "synth shell requires 0 <= shell_inner < shell_outer");
    }
    if (!(scene.dynamic_fraction >= 0.0 && scene.dynamic_fraction <= 1.0)) {
      throw Error(ErrorKind::kConfig, "synth.dynamic_fraction must lie in [0, 1]");
    }
  }
};

struct DatasetSettings {
  std::string layout = "kitti";  ///< kitti | euroc
  std::string sequence = "00";
  std::string left_dir = "image_2";
  std::string right_dir = "image_3";
  std::string left_projection = "P2";
  std::string right_projection = "P3";
  std::string oxts_root;  ///< explicit raw-drive mapping for the sequence
  std::int64_t oxts_time_offset_ns = 0;

  void validate() const {
    if (layout != "kitti" && layout != "euroc") {
      throw Error(ErrorKind::kConfig, "dataset.layout must be kitti or euroc");
    }
  }
};

struct PipelineSettings {
  double max_failure_fraction = 0.2;  ///< of frame pairs before a nonzero exit
  int workers = 1;
  int status_window = 20;             ///< intervals per bias update
  double trust_region = kBiasTrustRegion;
  double fusion_max_residual = 0.15;  ///< m; ICP mean residual above this falls back to IMU
  std::string velocity_source = "reference";  ///< reference | groundtruth

  void validate() const {
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
      throw Error(ErrorKind::kConfig, "pipeline.max_failure_fraction must lie in [0, 1]");
    }
    if (workers < 1 || status_window < 1) {
      throw Error(ErrorKind::kConfig, "pipeline.workers and status_window must be >= 1");
    }
    if (!(trust_region > 0.0) || !(fusion_max_residual > 0.0)) {
      throw Error(ErrorKind::kConfig, "pipeline trust_region and fusion_max_residual must be > 0");
    }
    if (velocity_source != "reference" && velocity_source != "groundtruth") {
      throw Error(ErrorKind::kConfig, "pipeline.velocity_source must be reference or groundtruth");
    }
  }
};

struct RunConfig {
  StereoRig rig = default_synthetic_rig();
  DepthBand band;
  IcpParams icp;
  int fill_radius = kFillRadius;
  FlowMode flow_mode = FlowMode::kEndpoint;
  ImuNoiseModel noise;
  Vec3 gravity = kDefaultGravity;
  StatusUpdateParams status;
  LossConfig loss;
  DegradationSpec degradation;
  SynthSettings synth;
  DatasetSettings dataset;
  PipelineSettings pipeline;

  void validate() const {
    auto wrap = [](const char* section, auto&& f) {
      try {
        f();
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kConfig) throw;
        throw Error(ErrorKind::kConfig, std::string(section) + ": " + e.what());
      }
    };
    wrap("rig", [&] { rig.validate(); });
    wrap("depth", [&] { band.validate(); });
    wrap("icp", [&] { icp.validate(); });
    wrap("imu", [&] { noise.validate(); });
    wrap("status", [&] { status.validate(); });
    wrap("loss", [&] { loss.validate(); });
    wrap("degradation", [&] { degradation.validate(); });
    synth.validate();
    dataset.validate();
    pipeline.validate();
    if (fill_radius < 0) throw Error(ErrorKind::kConfig, "flow.fill_radius must be >= 0");
    if (!gravity.allFinite()) throw Error(ErrorKind::kConfig, "imu.gravity must be finite");
  }

  KittiOptions kitti_options() const {
    KittiOptions o;
    o.left_dir = dataset.left_dir;
    o.right_dir = dataset.right_dir;
    o.left_projection = dataset.left_projection;
    o.right_projection = dataset.right_projection;
    o.cam_to_imu = rig.cam_to_imu;
    o.width = rig.width;
    o.height = rig.height;
    o.oxts_root = dataset.oxts_root;
    o.oxts_time_offset_ns = dataset.oxts_time_offset_ns;
    return o;
  }
};

namespace config_detail {

struct Key {
  std::string section;
  std::string name;
  std::string doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;  ///< throws std::string on bad value
};

inline double to_double(std::string_view v) {
  double d = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), d);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw std::string("expected a number, got '" + std::string(v) + "'");
  }
  return d;
}

template <typename I>
I to_int(std::string_view v) {
  I d = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), d);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw std::string("expected an integer, got '" + std::string(v) + "'");
  }
  return d;
}

inline std::vector<double> to_numbers(std::string_view v, std::size_t n) {
  const auto tok = detail::split_ws(v);
  if (tok.size() != n) {
    throw std::string("expected " + std::to_string(n) + " numbers, got " +
                      std::to_string(tok.size()));
  }
  std::vector<double> out;
  for (auto t : tok) out.push_back(to_double(t));
  return out;
}

template <typename F>
Key num(const char* s, const char* k, const char* doc, F ref) {
  return {s, k, doc,
          [ref](const RunConfig& c) { return detail::shortest(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, std::string_view v) { ref(c) = to_double(v); }};
}

template <typename I, typename F>
Key integer(const char* s, const char* k, const char* doc, F ref) {
  return {s, k, doc,
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, std::string_view v) { ref(c) = to_int<I>(v); }};
}

template <typename F>
Key text(const char* s, const char* k, const char* doc, F ref) {
  return {s, k, doc, [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); },
          [ref](RunConfig& c, std::string_view v) { ref(c) = std::string(v); }};
}

template <typename F>
Key boolean(const char* s, const char* k, const char* doc, F ref) {
  return {s, k, doc,
          [ref](const RunConfig& c) {
            return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [ref](RunConfig& c, std::string_view v) {
            if (v == "true" || v == "1") {
              ref(c) = true;
            } else if (v == "false" || v == "0") {
              ref(c) = false;
            } else {
              throw std::string("expected true or false, got '" + std::string(v) + "'");
            }
          }};
}

template <typename F>
Key vec3(const char* s, const char* k, const char* doc, F ref) {
  return {s, k, doc,
          [ref](const RunConfig& c) {
            const Vec3& v = ref(const_cast<RunConfig&>(c));
            return detail::shortest(v.x()) + " " + detail::shortest(v.y()) + " " +
                   detail::shortest(v.z());
          },
          [ref](RunConfig& c, std::string_view v) {
            const auto n = to_numbers(v, 3);
            ref(c) = Vec3(n[0], n[1], n[2]);
          }};
}

inline std::vector<Key> build_schema() {
  using C = RunConfig;
  std::vector<Key> k;
  k.push_back(num("rig", "fx", "focal length x (px)", [](C& c) -> double& { return c.rig.intrinsics.fx; }));
  k.push_back(num("rig", "fy", "focal length y (px)", [](C& c) -> double& { return c.rig.intrinsics.fy; }));
  k.push_back(num("rig", "cx", "principal point x (px)", [](C& c) -> double& { return c.rig.intrinsics.cx; }));
  k.push_back(num("rig", "cy", "principal point y (px)", [](C& c) -> double& { return c.rig.intrinsics.cy; }));
  k.push_back(num("rig", "baseline", "stereo baseline (m)", [](C& c) -> double& { return c.rig.baseline; }));
  k.push_back(integer<int>("rig", "width", "image width (px)", [](C& c) -> int& { return c.rig.width; }));
  k.push_back(integer<int>("rig", "height", "image height (px)", [](C& c) -> int& { return c.rig.height; }));
  k.push_back({"rig", "cam_to_imu", "left camera to IMU, row-major 3x4 [R|t]",
               [](const C& c) { return pose_row(c.rig.cam_to_imu); },
               [](C& c, std::string_view v) {
                 const auto tok = detail::split_ws(v);
                 try {
                   c.rig.cam_to_imu = parse_pose_row(tok, "cam_to_imu", 0);
                 } catch (const Error& e) {
                   throw std::string(e.what());
                 }
               }});
  k.push_back(num("depth", "near", "depth band lower bound d1 (m)", [](C& c) -> double& { return c.band.near; }));
  k.push_back(num("depth", "far", "depth band upper bound d2 (m)", [](C& c) -> double& { return c.band.far; }));
  k.push_back(integer<int>("icp", "max_iterations", "", [](C& c) -> int& { return c.icp.max_iterations; }));
  k.push_back(num("icp", "convergence_tol", "se(3) step norm", [](C& c) -> double& { return c.icp.convergence_tol; }));
  k.push_back(num("icp", "max_pair_distance", "m", [](C& c) -> double& { return c.icp.max_pair_distance; }));
  k.push_back(num("icp", "trim_fraction", "worst fraction dropped per iteration", [](C& c) -> double& { return c.icp.trim_fraction; }));
  k.push_back(num("icp", "residual_reject_sigma", "robust sigmas for rejection", [](C& c) -> double& { return c.icp.residual_reject_sigma; }));
  k.push_back(num("icp", "reject_floor", "m", [](C& c) -> double& { return c.icp.reject_floor; }));
  k.push_back(num("icp", "voxel_leaf", "m", [](C& c) -> double& { return c.icp.voxel_leaf; }));
  k.push_back(integer<std::size_t>("icp", "voxel_threshold", "downsample above this many points", [](C& c) -> std::size_t& { return c.icp.voxel_threshold; }));
  k.push_back(integer<int>("flow", "fill_radius", "dense fill radius (px)", [](C& c) -> int& { return c.fill_radius; }));
  k.push_back({"flow", "mode", "endpoint | paper",
               [](const C& c) { return std::string(c.flow_mode == FlowMode::kPaper ? "paper" : "endpoint"); },
               [](C& c, std::string_view v) {
                 if (v == "paper") {
                   c.flow_mode = FlowMode::kPaper;
                 } else if (v == "endpoint") {
                   c.flow_mode = FlowMode::kEndpoint;
                 } else {
                   throw std::string("expected endpoint or paper, got '" + std::string(v) + "'");
                 }
               }});
  k.push_back(num("imu", "gyro_noise", "rad/s/sqrt(Hz)", [](C& c) -> double& { return c.noise.gyro_noise; }));
  k.push_back(num("imu", "accel_noise", "m/s^2/sqrt(Hz)", [](C& c) -> double& { return c.noise.accel_noise; }));
  k.push_back(num("imu", "gyro_random_walk", "rad/s^2/sqrt(Hz)", [](C& c) -> double& { return c.noise.gyro_random_walk; }));
  k.push_back(num("imu", "accel_random_walk", "m/s^3/sqrt(Hz)", [](C& c) -> double& { return c.noise.accel_random_walk; }));
  k.push_back(vec3("imu", "gravity", "world gravity (m/s^2)", [](C& c) -> Vec3& { return c.gravity; }));
  k.push_back(num("status", "huber_delta", "", [](C& c) -> double& { return c.status.huber_delta; }));
  k.push_back(integer<int>("status", "max_iterations", "", [](C& c) -> int& { return c.status.max_iterations; }));
  k.push_back(num("status", "step_tol", "", [](C& c) -> double& { return c.status.step_tol; }));
  k.push_back(num("status", "damping_init", "", [](C& c) -> double& { return c.status.damping_init; }));
  k.push_back(num("loss", "beta", "translation weight of the IMU loss", [](C& c) -> double& { return c.loss.beta; }));
  k.push_back(num("loss", "beta_prime", "translation weight of the fused loss", [](C& c) -> double& { return c.loss.beta_prime; }));
  k.push_back(num("degradation", "miscal_deg", "extrinsic rotation error (deg)", [](C& c) -> double& { return c.degradation.miscal_deg; }));
  k.push_back(num("degradation", "desync_ms", "IMU timestamp offset (ms)", [](C& c) -> double& { return c.degradation.desync_ms; }));
  k.push_back({"degradation", "desync_mode", "constant | jitter",
               [](const C& c) {
                 return std::string(c.degradation.desync_mode == DesyncMode::kJitter ? "jitter" : "constant");
               },
               [](C& c, std::string_view v) {
                 if (v == "constant") {
                   c.degradation.desync_mode = DesyncMode::kConstant;
                 } else if (v == "jitter") {
                   c.degradation.desync_mode = DesyncMode::kJitter;
                 } else {
                   throw std::string("expected constant or jitter, got '" + std::string(v) + "'");
                 }
               }});
  k.push_back(num("degradation", "imu_drop_rate", "[0, 1]", [](C& c) -> double& { return c.degradation.imu_drop_rate; }));
  k.push_back(num("degradation", "cam_drop_rate", "[0, 1]", [](C& c) -> double& { return c.degradation.cam_drop_rate; }));
  k.push_back({"degradation", "seed", "required when any degradation is seeded; 'none' if unset",
               [](const C& c) {
                 return c.degradation.seed ? std::to_string(*c.degradation.seed) : std::string("none");
               },
               [](C& c, std::string_view v) {
                 if (v == "none") {
                   c.degradation.seed.reset();
                 } else {
                   c.degradation.seed = to_int<std::uint64_t>(v);
                 }
               }});
  k.push_back(text("synth", "trajectory", "vehicle | circle | line", [](C& c) -> std::string& { return c.synth.trajectory; }));
  k.push_back(num("synth", "duration", "s", [](C& c) -> double& { return c.synth.duration; }));
  k.push_back(num("synth", "speed", "m/s", [](C& c) -> double& { return c.synth.speed; }));
  k.push_back(num("synth", "circle_omega", "rad/s", [](C& c) -> double& { return c.synth.circle_omega; }));
  k.push_back(integer<std::size_t>("synth", "landmarks", "", [](C& c) -> std::size_t& { return c.synth.scene.landmarks; }));
  k.push_back(num("synth", "shell_inner", "m", [](C& c) -> double& { return c.synth.scene.shell_inner; }));
  k.push_back(num("synth", "shell_outer", "m", [](C& c) -> double& { return c.synth.scene.shell_outer; }));
  k.push_back(num("synth", "dynamic_fraction", "", [](C& c) -> double& { return c.synth.scene.dynamic_fraction; }));
  k.push_back(num("synth", "dynamic_speed", "m/s", [](C& c) -> double& { return c.synth.scene.dynamic_speed; }));
  k.push_back(num("synth", "imu_rate", "Hz", [](C& c) -> double& { return c.synth.scene.imu_rate; }));
  k.push_back(num("synth", "cam_rate", "Hz", [](C& c) -> double& { return c.synth.scene.cam_rate; }));
  k.push_back(integer<std::uint64_t>("synth", "seed", "", [](C& c) -> std::uint64_t& { return c.synth.scene.seed; }));
  k.push_back(vec3("synth", "bias_bg", "true gyro bias (rad/s)", [](C& c) -> Vec3& { return c.synth.bias_bg; }));
  k.push_back(vec3("synth", "bias_ba", "true accel bias (m/s^2)", [](C& c) -> Vec3& { return c.synth.bias_ba; }));
  k.push_back(boolean("synth", "imu_noise", "add white noise from [imu]", [](C& c) -> bool& { return c.synth.imu_noise; }));
  k.push_back(text("dataset", "layout", "kitti | euroc", [](C& c) -> std::string& { return c.dataset.layout; }));
  k.push_back(text("dataset", "sequence", "KITTI sequence id", [](C& c) -> std::string& { return c.dataset.sequence; }));
  k.push_back(text("dataset", "left_dir", "", [](C& c) -> std::string& { return c.dataset.left_dir; }));
  k.push_back(text("dataset", "right_dir", "", [](C& c) -> std::string& { return c.dataset.right_dir; }));
  k.push_back(text("dataset", "left_projection", "", [](C& c) -> std::string& { return c.dataset.left_projection; }));
  k.push_back(text("dataset", "right_projection", "", [](C& c) -> std::string& { return c.dataset.right_projection; }));
  k.push_back(text("dataset", "oxts_root", "raw-drive OXTS directory for the sequence", [](C& c) -> std::string& { return c.dataset.oxts_root; }));
  k.push_back(integer<std::int64_t>("dataset", "oxts_time_offset_ns", "", [](C& c) -> std::int64_t& { return c.dataset.oxts_time_offset_ns; }));
  k.push_back(num("pipeline", "max_failure_fraction", "", [](C& c) -> double& { return c.pipeline.max_failure_fraction; }));
  k.push_back(integer<int>("pipeline", "workers", "", [](C& c) -> int& { return c.pipeline.workers; }));
  k.push_back(integer<int>("pipeline", "status_window", "intervals per bias update", [](C& c) -> int& { return c.pipeline.status_window; }));
  k.push_back(num("pipeline", "trust_region", "bound on a first-order bias correction; larger changes re-preintegrate", [](C& c) -> double& { return c.pipeline.trust_region; }));
  k.push_back(num("pipeline", "fusion_max_residual", "m", [](C& c) -> double& { return c.pipeline.fusion_max_residual; }));
  k.push_back(text("pipeline", "velocity_source", "reference | groundtruth", [](C& c) -> std::string& { return c.pipeline.velocity_source; }));
  return k;
}

}  // namespace config_detail

inline const std::vector<config_detail::Key>& config_schema() {
  static const std::vector<config_detail::Key> schema = config_detail::build_schema();
  return schema;
}

inline std::string config_env_name(const std::string& section, const std::string& key) {
  std::string s = "SVIO_" + section + "_" + key;
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

/// Parses config text onto the defaults. `origin` names the source in errors.
inline RunConfig parse_run_config(std::string_view text, const std::string& origin = "<config>",
                                  bool use_env = true) {
  RunConfig cfg;
  const auto& schema = config_schema();
  std::set<std::string> seen;
  std::string section;
  detail::for_each_line(text, [&](long n, std::string_view raw) {
    std::string_view line = raw;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) return;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(origin, n, "unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      const bool known = std::any_of(schema.begin(), schema.end(),
                                     [&](const auto& k) { return k.section == section; });
      if (!known) throw ParseError(origin, n, "unknown section [" + section + "]");
      return;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(origin, n, "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    const std::string path = section + "." + key;
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const auto& k) {
      return k.section == section && k.name == key;
    });
    if (it == schema.end()) throw ParseError(origin, n, "unknown key " + path);
    if (!seen.insert(path).second) throw ParseError(origin, n, "duplicate key " + path);
    try {
      it->set(cfg, value);
    } catch (const std::string& msg) {
      throw ParseError(origin, n, path + ": " + msg);
    }
  });
  if (use_env) {
    for (const auto& k : schema) {
      const std::string env = config_env_name(k.section, k.name);
      if (const char* v = std::getenv(env.c_str())) {
        try {
          k.set(cfg, detail::trim(v));
        } catch (const std::string& msg) {
          throw Error(ErrorKind::kConfig, env + " (" + k.section + "." + k.name + "): " + msg);
        }
      }
    }
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_run_config(const fs::path& path, bool use_env = true) {
  return parse_run_config(detail::read_file(path), path.string(), use_env);
}

/// Every key with its effective value, grouped by section in schema order.
inline std::string dump_run_config(const RunConfig& cfg, bool with_docs = false) {
  std::string out, section;
  for (const auto& k : config_schema()) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    if (with_docs && !k.doc.empty()) out += "# " + k.doc + "\n";
    out += k.name + " = " + k.get(cfg) + "\n";
  }
  return out;
}

}  // namespace svio
