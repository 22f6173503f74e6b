#pragma once

// End-to-end stages over a parsed sequence: stereo supervision per frame
// pair, IMU preintegration per camera interval, windowed bias update,
// fusion, trajectory integration and evaluation.

#include <cstdio>
#include <string>
#include <vector>

#include "svio/config.hpp"
#include "svio/dataset_io.hpp"
#include "svio/formats.hpp"
#include "svio/fusion_eval.hpp"
#include "svio/icp.hpp"
#include "svio/imu.hpp"
#include "svio/parallel.hpp"
#include "svio/scene_flow.hpp"
#include "svio/status_update.hpp"

namespace svio {

/// Valid, band-filtered depth of one frame and its point cloud.
struct FrameCloud {
  DepthMap depth;
  PointCloud cloud;
};

inline FrameCloud load_frame_cloud(const fs::path& disparity, const RunConfig& cfg,
                                   const StereoRig& rig) {
  FrameCloud f;
  f.depth = depth_band_filter(disparity_to_depth(read_disparity(disparity), rig), cfg.band);
  f.cloud = depth_to_pointcloud(f.depth, rig.intrinsics);
  return f;
}

/// Camera-frame motion expressed in the body frame: T_bc * T * T_bc^-1.
inline RigidTransform camera_to_body_motion(const RigidTransform& cam, const StereoRig& rig) {
  return rig.cam_to_imu * cam * rig.cam_to_imu.inverse();
}

inline RigidTransform body_to_camera_motion(const RigidTransform& body, const StereoRig& rig) {
  return rig.cam_to_imu.inverse() * body * rig.cam_to_imu;
}

/// Stereo registration of frames (index, index + 1).
struct PairLabel {
  std::size_t index = 0;
  std::int64_t t0_ns = 0;
  std::int64_t t1_ns = 0;
  bool ok = false;
  std::string error;
  Se3Tangent camera_se3;  ///< maps frame index+1 camera points into frame index
  double mean_residual = 0.0;
  int iterations = 0;
  std::size_t correspondences = 0;
  std::size_t rejected = 0;
  std::size_t unsupported = 0;

  Se3Tangent body_se3(const StereoRig& rig) const {
    return se3_log(camera_to_body_motion(se3_exp(camera_se3), rig));
  }
};

struct SuperviseOptions {
  fs::path out;           ///< empty: keep labels in memory only
  bool write_flow = true;  ///< dense .flo + mask and 3D flow PLY per pair
  int workers = 1;
};

struct SuperviseResult {
  std::vector<PairLabel> pairs;
  std::size_t failures = 0;
};

namespace detail {

inline std::string pair_name(std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06zu", i);
  return name;
}

/// Gyro-only rotation over [t0, t1] at zero bias, or identity without IMU coverage.
inline Rotation gyro_rotation(std::span<const ImuSample> imu, std::int64_t t0, std::int64_t t1) {
  if (imu.size() < 2 || t0 < imu.front().t_ns || t1 > imu.back().t_ns) return Rotation::identity();
  return preintegrate(slice_interval(imu, t0, t1), ImuStatus{}, ImuNoiseModel::zero()).delta_r;
}

}  // namespace detail

/// ICP per consecutive frame pair. Each registration starts from a body
/// motion guess (gyro rotation, translation of the last good pair scaled to
/// the interval) mapped into the camera frame. Pairs that fail are recorded,
/// not thrown.
inline SuperviseResult supervise(const SequenceManifest& m, const RunConfig& cfg,
                                 const SuperviseOptions& opt = {}) {
  m.validate();
  SuperviseResult res;
  const std::size_t n = m.size();
  if (n < 2) return res;
  std::vector<PointCloud> clouds(n);
  std::vector<std::string> load_error(n);
  parallel_for(n, opt.workers, [&](std::size_t i) {
    try {
      clouds[i] = load_frame_cloud(m.disparity[i], cfg, m.rig).cloud;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) throw;
      load_error[i] = e.what();
    }
  });

  IcpParams icp_params = cfg.icp;
  icp_params.workers = opt.workers;
  std::vector<IcpResult> regs(n - 1);
  res.pairs.resize(n - 1);
  std::optional<std::pair<Vec3, double>> last_motion;  // body translation, interval seconds
  for (std::size_t i = 0; i + 1 < n; ++i) {
    PairLabel& p = res.pairs[i];
    p.index = i;
    p.t0_ns = m.frame_t_ns[i];
    p.t1_ns = m.frame_t_ns[i + 1];
    const double dt = ns_to_seconds(p.t1_ns - p.t0_ns);
    if (!load_error[i].empty() || !load_error[i + 1].empty()) {
      p.error = !load_error[i].empty() ? load_error[i] : load_error[i + 1];
      continue;
    }
    RigidTransform guess{detail::gyro_rotation(m.imu, p.t0_ns, p.t1_ns), Vec3::Zero()};
    if (last_motion) guess.translation = last_motion->first * (dt / last_motion->second);
    try {
      regs[i] = icp(clouds[i], clouds[i + 1], icp_params, body_to_camera_motion(guess, m.rig));
      p.camera_se3 = stereo_se3(regs[i]);
      p.ok = true;
      p.mean_residual = regs[i].mean_residual;
      p.iterations = regs[i].iterations;
      p.correspondences = regs[i].correspondences.size();
      p.rejected = regs[i].rejected.size();
      p.unsupported = regs[i].unsupported_prev.size();
      last_motion = {camera_to_body_motion(regs[i].transform, m.rig).translation, dt};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kRegistrationFailure && e.kind() != ErrorKind::kNotConverged &&
          e.kind() != ErrorKind::kRankDeficient) {
        throw;
      }
      p.error = e.what();
      p.iterations = regs[i].iterations;
    }
  }
  for (const auto& p : res.pairs) res.failures += !p.ok;

  if (!opt.out.empty() && opt.write_flow) {
    fs::create_directories(opt.out / "flow");
    fs::create_directories(opt.out / "flow3d");
    parallel_for(n - 1, opt.workers, [&](std::size_t i) {
      if (!res.pairs[i].ok) return;
      const FrameCloud prev = load_frame_cloud(m.disparity[i], cfg, m.rig);
      const FlowField3D field = compute_3d_flow(prev.cloud, clouds[i + 1], regs[i]);
      const FlowField2D sparse = project_flow(field, prev.depth, m.rig, View::kLeft, cfg.flow_mode);
      const FlowField2D dense = synthesize_dense_2d_flow(sparse, prev.cloud, cfg.fill_radius);
      const std::string name = detail::pair_name(i);
      write_flo(opt.out / "flow" / (name + ".flo"), dense);
      write_mask_png(opt.out / "flow" / (name + "_mask.png"), dense);
      write_flow_ply(opt.out / "flow3d" / (name + ".ply"), field);
    });
  }
  return res;
}

// Label file: one row per pair,
// index t0_ns t1_ns ok wx wy wz vx vy vz mean_residual iterations correspondences rejected unsupported

inline void write_labels(const fs::path& path, std::span<const PairLabel> pairs) {
  std::string out =
      "# index t0_ns t1_ns ok wx wy wz vx vy vz mean_residual iterations correspondences "
      "rejected unsupported\n";
  for (const auto& p : pairs) {
    out += std::to_string(p.index) + " " + std::to_string(p.t0_ns) + " " + std::to_string(p.t1_ns) +
           " " + (p.ok ? "1" : "0");
    for (int k = 0; k < 6; ++k) out += " " + detail::shortest(p.camera_se3.vector()[k]);
    out += " " + detail::shortest(p.mean_residual) + " " + std::to_string(p.iterations) + " " +
           std::to_string(p.correspondences) + " " + std::to_string(p.rejected) + " " +
           std::to_string(p.unsupported) + "\n";
  }
  detail::write_file(path, out);
}

inline std::vector<PairLabel> read_labels(const fs::path& path) {
  const std::string file = path.string();
  const std::string text = detail::read_file(path);
  std::vector<PairLabel> out;
  detail::for_each_line(text, [&](long n, std::string_view line) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto tok = detail::split_ws(line);
    if (tok.size() != 15) {
      throw ParseError(file, n, "expected 15 columns, got " + std::to_string(tok.size()));
    }
    PairLabel p;
    p.index = static_cast<std::size_t>(detail::parse_int64(tok[0], file, n));
    p.t0_ns = detail::parse_int64(tok[1], file, n);
    p.t1_ns = detail::parse_int64(tok[2], file, n);
    const auto ok = detail::parse_int64(tok[3], file, n);
    if (ok != 0 && ok != 1) throw ParseError(file, n, "ok flag must be 0 or 1");
    p.ok = ok == 1;
    Vec6 v;
    for (int k = 0; k < 6; ++k) v[k] = detail::parse_double(tok[4 + k], file, n);
    p.camera_se3 = Se3Tangent::from_vector(v);
    p.mean_residual = detail::parse_double(tok[10], file, n);
    p.iterations = static_cast<int>(detail::parse_int64(tok[11], file, n));
    p.correspondences = static_cast<std::size_t>(detail::parse_int64(tok[12], file, n));
    p.rejected = static_cast<std::size_t>(detail::parse_int64(tok[13], file, n));
    p.unsupported = static_cast<std::size_t>(detail::parse_int64(tok[14], file, n));
    if (p.index != out.size() || p.t1_ns <= p.t0_ns) {
      throw ParseError(file, n, "pairs must be consecutive with increasing times");
    }
    out.push_back(p);
  });
  return out;
}

/// Labels must describe exactly the manifest's consecutive frame pairs.
inline void check_labels(const SequenceManifest& m, std::span<const PairLabel> pairs) {
  const std::size_t expected = m.size() < 2 ? 0 : m.size() - 1;
  if (pairs.size() != expected) {
    throw Error(ErrorKind::kInvalidArgument, "labels cover " + std::to_string(pairs.size()) +
                                                 " pairs, dataset has " + std::to_string(expected));
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].t0_ns != m.frame_t_ns[i] || pairs[i].t1_ns != m.frame_t_ns[i + 1]) {
      throw Error(ErrorKind::kInvalidArgument,
                  "label " + std::to_string(i) + " timestamps do not match the dataset");
    }
  }
}

/// Per-frame world rotation and velocity used to turn preintegrated deltas
/// into relative poses.
struct ReferenceStates {
  RigidTransform origin;
  std::vector<RigidTransform> pose;
  std::vector<Vec3> velocity;
};

namespace detail {

/// Central differences of positions; one-sided at the ends.
inline std::vector<Vec3> velocities_from_poses(const std::vector<RigidTransform>& pose,
                                               std::span<const std::int64_t> t_ns) {
  const std::size_t n = pose.size();
  std::vector<Vec3> v(n, Vec3::Zero());
  if (n < 2) return v;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? i : i + 1;
    v[i] = (pose[b].translation - pose[a].translation) / ns_to_seconds(t_ns[b] - t_ns[a]);
  }
  return v;
}

}  // namespace detail

/// Ground-truth source: gt poses and gt velocity (or its central
/// differences). Reference source: the stereo chain from the gt start pose
/// (identity without gt), failed pairs bridged at constant velocity.
inline ReferenceStates reference_states(const SequenceManifest& m, std::span<const PairLabel> pairs,
                                        const RunConfig& cfg) {
  ReferenceStates r;
  if (m.ground_truth && !m.ground_truth->empty()) r.origin = m.ground_truth->entries.front().pose;
  if (cfg.pipeline.velocity_source == "groundtruth") {
    if (!m.ground_truth) {
      throw Error(ErrorKind::kConfig, "velocity_source = groundtruth needs ground truth");
    }
    for (const auto& e : m.ground_truth->entries) r.pose.push_back(e.pose);
    r.velocity = m.gt_velocity.empty() ? detail::velocities_from_poses(r.pose, m.frame_t_ns)
                                       : m.gt_velocity;
    return r;
  }
  check_labels(m, pairs);
  r.pose.push_back(r.origin);
  std::optional<std::pair<Se3Tangent, double>> last;
  for (const auto& p : pairs) {
    const double dt = ns_to_seconds(p.t1_ns - p.t0_ns);
    Se3Tangent step;
    if (p.ok) {
      step = p.body_se3(m.rig);
      last = {step, dt};
    } else if (last) {
      step = Se3Tangent::from_vector(last->first.vector() * (dt / last->second));
    }
    r.pose.push_back(r.pose.back() * se3_exp(step));
  }
  r.velocity = detail::velocities_from_poses(r.pose, m.frame_t_ns);
  return r;
}

/// IMU-se3 of one camera interval.
struct ImuInterval {
  std::size_t index = 0;
  std::int64_t t0_ns = 0;
  std::int64_t t1_ns = 0;
  bool ok = false;
  std::string error;
  std::size_t samples = 0;
  PreintegratedDelta delta;
  Se3Tangent se3;
};

inline Se3Tangent interval_se3(const PreintegratedDelta& d, const ReferenceStates& ref,
                               std::size_t i, const Vec3& gravity) {
  return delta_to_relative_se3(d, ref.velocity[i], gravity, ref.pose[i].rotation);
}

/// Preintegrates every camera interval with `status[i]` (one entry, or one
/// per interval). Intervals the IMU stream does not cover are marked failed.
inline std::vector<ImuInterval> preintegrate_intervals(const SequenceManifest& m,
                                                       const ReferenceStates& ref,
                                                       std::span<const ImuStatus> status,
                                                       const RunConfig& cfg, int workers = 1) {
  const std::size_t n = m.size() < 2 ? 0 : m.size() - 1;
  if (status.size() != 1 && status.size() != n) {
    throw Error(ErrorKind::kInvalidArgument, "need one bias status or one per interval");
  }
  if (ref.pose.size() != m.size() || ref.velocity.size() != m.size()) {
    throw Error(ErrorKind::kInvalidArgument, "reference states do not cover every frame");
  }
  std::vector<ImuInterval> out(n);
  parallel_for(n, workers, [&](std::size_t i) {
    ImuInterval& iv = out[i];
    iv.index = i;
    iv.t0_ns = m.frame_t_ns[i];
    iv.t1_ns = m.frame_t_ns[i + 1];
    try {
      const auto s = slice_interval(m.imu, iv.t0_ns, iv.t1_ns);
      iv.samples = s.size();
      iv.delta = preintegrate(s, status.size() == 1 ? status[0] : status[i], cfg.noise);
      iv.se3 = interval_se3(iv.delta, ref, i, cfg.gravity);
      iv.ok = iv.se3.all_finite();
      if (!iv.ok) iv.error = "non-finite imu-se3";
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) throw;
      iv.error = e.what();
    }
  });
  return out;
}

/// Moves intervals to per-interval bias with the first-order correction;
/// corrections outside the trust region re-preintegrate.
inline std::size_t correct_intervals(std::vector<ImuInterval>& ivs, const SequenceManifest& m,
                                     const ReferenceStates& ref, std::span<const ImuStatus> status,
                                     const RunConfig& cfg) {
  std::size_t reintegrated = 0;
  for (std::size_t i = 0; i < ivs.size(); ++i) {
    ImuInterval& iv = ivs[i];
    if (!iv.ok) continue;
    const ImuStatus& s = status[i];
    try {
      iv.delta = apply_bias_correction(iv.delta, s.bg - iv.delta.bias_used.bg,
                                       s.ba - iv.delta.bias_used.ba, cfg.pipeline.trust_region);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kTrustRegion) throw;
      iv.delta = preintegrate(slice_interval(m.imu, iv.t0_ns, iv.t1_ns), s, cfg.noise);
      ++reintegrated;
    }
    iv.se3 = interval_se3(iv.delta, ref, i, cfg.gravity);
  }
  return reintegrated;
}

/// Bias estimate for a run of consecutive intervals.
struct BiasWindow {
  std::size_t first = 0;  ///< first interval
  std::size_t last = 0;   ///< one past the last interval
  std::int64_t t0_ns = 0;
  std::int64_t t1_ns = 0;
  std::size_t used = 0;   ///< intervals with both stereo and IMU
  bool updated = false;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  ImuStatus status;
  std::string note;
};

/// Windows of `status_window` intervals, each solved from the previous
/// window's estimate against the stereo body motion of its good pairs.
/// Windows without usable intervals, or whose solve fails, carry the
/// previous estimate.
inline std::vector<BiasWindow> update_bias_timeline(const SequenceManifest& m,
                                                    std::span<const PairLabel> pairs,
                                                    const ReferenceStates& ref,
                                                    const RunConfig& cfg,
                                                    const ImuStatus& prior = {}) {
  check_labels(m, pairs);
  std::vector<BiasWindow> out;
  ImuStatus current = prior;
  const auto w = static_cast<std::size_t>(cfg.pipeline.status_window);
  for (std::size_t first = 0; first < pairs.size(); first += w) {
    BiasWindow bw;
    bw.first = first;
    bw.last = std::min(pairs.size(), first + w);
    bw.t0_ns = pairs[bw.first].t0_ns;
    bw.t1_ns = pairs[bw.last - 1].t1_ns;
    std::vector<StatusInterval> ivs;
    for (std::size_t i = bw.first; i < bw.last; ++i) {
      if (!pairs[i].ok) continue;
      try {
        ivs.push_back({slice_interval(m.imu, pairs[i].t0_ns, pairs[i].t1_ns),
                       pairs[i].body_se3(m.rig),
                       KinematicContext{ref.velocity[i], cfg.gravity, ref.pose[i].rotation}});
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kIo) throw;
      }
    }
    bw.used = ivs.size();
    if (ivs.empty()) {
      bw.note = "no usable intervals";
    } else {
      try {
        const StatusUpdateResult r = update_status(ivs, current, cfg.noise, cfg.status);
        r.status.validate();
        current = r.status;
        bw.updated = true;
        bw.converged = r.converged;
        bw.iterations = r.iterations;
        bw.objective = r.objective;
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kIo) throw;
        bw.note = e.what();
      }
    }
    bw.status = current;
    out.push_back(bw);
  }
  return out;
}

inline std::vector<ImuStatus> status_per_interval(std::span<const BiasWindow> windows,
                                                  std::size_t intervals, const ImuStatus& prior = {}) {
  std::vector<ImuStatus> s(intervals, prior);
  for (const auto& w : windows) {
    for (std::size_t i = w.first; i < std::min(w.last, intervals); ++i) s[i] = w.status;
  }
  return s;
}

enum class StepSource { kStereo, kImu, kExtrapolated };

inline const char* to_string(StepSource s) {
  switch (s) {
    case StepSource::kStereo: return "stereo";
    case StepSource::kImu: return "imu";
    case StepSource::kExtrapolated: return "extrapolated";
  }
  return "unknown";
}

/// VIO-se3 of one interval in the body frame.
struct FusedStep {
  std::size_t index = 0;
  std::int64_t t0_ns = 0;
  std::int64_t t1_ns = 0;
  StepSource source = StepSource::kExtrapolated;
  Se3Tangent se3;
};

/// Stereo when ICP converged with mean residual <= fusion_max_residual,
/// else IMU, else the previous step scaled to the interval.
inline std::vector<FusedStep> fuse(const SequenceManifest& m, std::span<const PairLabel> pairs,
                                   std::span<const ImuInterval> imu, const RunConfig& cfg) {
  check_labels(m, pairs);
  if (imu.size() != pairs.size()) {
    throw Error(ErrorKind::kInvalidArgument, "imu intervals and labels differ in count");
  }
  std::vector<FusedStep> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    FusedStep s{i, pairs[i].t0_ns, pairs[i].t1_ns, StepSource::kExtrapolated, {}};
    if (pairs[i].ok && pairs[i].mean_residual <= cfg.pipeline.fusion_max_residual) {
      s.source = StepSource::kStereo;
      s.se3 = pairs[i].body_se3(m.rig);
    } else if (imu[i].ok) {
      s.source = StepSource::kImu;
      s.se3 = imu[i].se3;
    } else if (!out.empty()) {
      const FusedStep& p = out.back();
      s.se3 = Se3Tangent::from_vector(p.se3.vector() * (ns_to_seconds(s.t1_ns - s.t0_ns) /
                                                         ns_to_seconds(p.t1_ns - p.t0_ns)));
    }
    out.push_back(s);
  }
  return out;
}

inline Trajectory integrate_steps(std::span<const FusedStep> steps, const RigidTransform& origin,
                                  std::int64_t t0_ns) {
  std::vector<TimedTangent> rel;
  for (const auto& s : steps) rel.push_back({ns_to_seconds(s.t1_ns), s.se3});
  return integrate_se3_chain(rel, origin, ns_to_seconds(t0_ns));
}

struct EvalReport {
  RelativeErrorReport rel;
  double ate = 0.0;  ///< m
  double final_error = 0.0;  ///< m, last-frame position error without alignment
  std::size_t frames = 0;
};

inline EvalReport evaluate(const Trajectory& est, const Trajectory& gt, std::size_t stride = 10) {
  EvalReport r;
  r.frames = est.size();
  r.rel = kitti_relative_errors(est, gt, stride);
  if (!est.empty()) {
    r.ate = ate_rmse(est, gt);
    r.final_error = (est.entries.back().pose.translation - gt.entries.back().pose.translation).norm();
  }
  return r;
}

inline std::string format_eval(const EvalReport& r) {
  std::string out = "frames=" + std::to_string(r.frames) + "\n";
  out += "t_rel_percent=" + detail::shortest(r.rel.t_rel) + "\n";
  out += "r_rel_deg_per_100m=" + detail::shortest(r.rel.r_rel) + "\n";
  out += "windows=" + std::to_string(r.rel.windows) + "\n";
  out += "ate_rmse_m=" + detail::shortest(r.ate) + "\n";
  out += "final_error_m=" + detail::shortest(r.final_error) + "\n";
  for (const auto& l : r.rel.per_length) {
    const std::string k = std::to_string(static_cast<int>(l.length));
    out += "t_rel_" + k + "=" + detail::shortest(l.t_rel) + "\n";
    out += "r_rel_" + k + "=" + detail::shortest(l.r_rel) + "\n";
    out += "windows_" + k + "=" + std::to_string(l.windows) + "\n";
  }
  return out;
}

// Text outputs. Numbers use shortest round-trip formatting, so a re-read
// reproduces the in-memory values exactly.

/// index t0_ns t1_ns ok samples wx wy wz vx vy vz, then the 9x9 covariance
/// upper triangle row by row (45 values).
inline void write_imu_intervals(const fs::path& path, std::span<const ImuInterval> ivs) {
  std::string out = "# index t0_ns t1_ns ok samples wx wy wz vx vy vz cov_upper[45]\n";
  for (const auto& iv : ivs) {
    out += std::to_string(iv.index) + " " + std::to_string(iv.t0_ns) + " " +
           std::to_string(iv.t1_ns) + " " + (iv.ok ? "1" : "0") + " " + std::to_string(iv.samples);
    for (int k = 0; k < 6; ++k) out += " " + detail::shortest(iv.se3.vector()[k]);
    for (int r = 0; r < 9; ++r) {
      for (int c = r; c < 9; ++c) out += " " + detail::shortest(iv.delta.covariance(r, c));
    }
    out += "\n";
  }
  detail::write_file(path, out);
}

/// first last t0_ns t1_ns used updated converged iterations objective bg[3] ba[3]
inline void write_bias_timeline(const fs::path& path, std::span<const BiasWindow> ws) {
  std::string out =
      "# first last t0_ns t1_ns used updated converged iterations objective bgx bgy bgz bax bay "
      "baz\n";
  for (const auto& w : ws) {
    out += std::to_string(w.first) + " " + std::to_string(w.last) + " " + std::to_string(w.t0_ns) +
           " " + std::to_string(w.t1_ns) + " " + std::to_string(w.used) + " " +
           (w.updated ? "1" : "0") + " " + (w.converged ? "1" : "0") + " " +
           std::to_string(w.iterations) + " " + detail::shortest(w.objective);
    for (int k = 0; k < 3; ++k) out += " " + detail::shortest(w.status.bg[k]);
    for (int k = 0; k < 3; ++k) out += " " + detail::shortest(w.status.ba[k]);
    out += "\n";
  }
  detail::write_file(path, out);
}

inline std::vector<BiasWindow> read_bias_timeline(const fs::path& path) {
  const std::string file = path.string();
  std::vector<BiasWindow> out;
  detail::for_each_line(detail::read_file(path), [&](long n, std::string_view line) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') return;
    const auto tok = detail::split_ws(line);
    if (tok.size() != 15) {
      throw ParseError(file, n, "expected 15 columns, got " + std::to_string(tok.size()));
    }
    BiasWindow w;
    w.first = static_cast<std::size_t>(detail::parse_int64(tok[0], file, n));
    w.last = static_cast<std::size_t>(detail::parse_int64(tok[1], file, n));
    w.t0_ns = detail::parse_int64(tok[2], file, n);
    w.t1_ns = detail::parse_int64(tok[3], file, n);
    w.used = static_cast<std::size_t>(detail::parse_int64(tok[4], file, n));
    w.updated = detail::parse_int64(tok[5], file, n) != 0;
    w.converged = detail::parse_int64(tok[6], file, n) != 0;
    w.iterations = static_cast<int>(detail::parse_int64(tok[7], file, n));
    w.objective = detail::parse_double(tok[8], file, n);
    for (int k = 0; k < 3; ++k) w.status.bg[k] = detail::parse_double(tok[9 + k], file, n);
    for (int k = 0; k < 3; ++k) w.status.ba[k] = detail::parse_double(tok[12 + k], file, n);
    if (w.last <= w.first || (!out.empty() && w.first != out.back().last)) {
      throw ParseError(file, n, "bias windows must be contiguous and non-empty");
    }
    out.push_back(w);
  });
  return out;
}

/// index t0_ns t1_ns source wx wy wz vx vy vz
inline void write_fused_steps(const fs::path& path, std::span<const FusedStep> steps) {
  std::string out = "# index t0_ns t1_ns source wx wy wz vx vy vz\n";
  for (const auto& s : steps) {
    out += std::to_string(s.index) + " " + std::to_string(s.t0_ns) + " " + std::to_string(s.t1_ns) +
           " " + to_string(s.source);
    for (int k = 0; k < 6; ++k) out += " " + detail::shortest(s.se3.vector()[k]);
    out += "\n";
  }
  detail::write_file(path, out);
}

/// Every stage on one sequence, in memory.
struct PipelineRun {
  SuperviseResult stereo;
  ReferenceStates reference;
  std::vector<ImuInterval> imu;
  std::vector<BiasWindow> bias;
  std::size_t reintegrated = 0;
  std::vector<FusedStep> fused;
  Trajectory trajectory;
  std::optional<EvalReport> eval;  ///< against the manifest's ground truth
};

inline PipelineRun run_pipeline(const SequenceManifest& m, const RunConfig& cfg,
                                const SuperviseOptions& opt = {}) {
  PipelineRun r;
  r.stereo = supervise(m, cfg, opt);
  r.reference = reference_states(m, r.stereo.pairs, cfg);
  const ImuStatus prior;
  r.imu = preintegrate_intervals(m, r.reference, std::span<const ImuStatus>(&prior, 1), cfg,
                                 opt.workers);
  r.bias = update_bias_timeline(m, r.stereo.pairs, r.reference, cfg, prior);
  r.reintegrated = correct_intervals(r.imu, m, r.reference,
                                     status_per_interval(r.bias, r.imu.size(), prior), cfg);
  r.fused = fuse(m, r.stereo.pairs, r.imu, cfg);
  if (m.size() > 0) r.trajectory = integrate_steps(r.fused, r.reference.origin, m.frame_t_ns.front());
  if (m.ground_truth && m.size() > 0) r.eval = evaluate(r.trajectory, *m.ground_truth);
  return r;
}

}  // namespace svio
