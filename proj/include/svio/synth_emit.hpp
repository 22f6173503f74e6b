#pragma once

// Writes a synthetic scene to disk in KITTI odometry or EuRoC layout.

#include <string>

#include "svio/config.hpp"
#include "svio/dataset_io.hpp"
#include "svio/formats.hpp"
#include "svio/parallel.hpp"
#include "svio/synth_world.hpp"

namespace svio {

inline AnalyticTrajectory trajectory_from_settings(const SynthSettings& s) {
  if (s.trajectory == "circle") {
    return AnalyticTrajectory::circle(s.speed / s.circle_omega, s.circle_omega, s.duration);
  }
  if (s.trajectory == "line") {
    return AnalyticTrajectory::straight_line(Vec3(0, 0, 1.5), Vec3(s.speed, 0, 0), s.duration);
  }
  return AnalyticTrajectory::vehicle(s.speed, s.duration);
}

inline SyntheticScene scene_from_config(const RunConfig& cfg) {
  SyntheticScene s = make_scene(trajectory_from_settings(cfg.synth), cfg.rig, cfg.synth.scene);
  s.trajectory.gravity = cfg.gravity;
  s.true_bias = ImuStatus{cfg.synth.bias_ba, cfg.synth.bias_bg};
  s.noise = cfg.synth.imu_noise ? cfg.noise : ImuNoiseModel::zero();
  return s;
}

enum class Layout { kKitti, kEuroc };

inline Layout parse_layout(const std::string& s) {
  if (s == "kitti") return Layout::kKitti;
  if (s == "euroc") return Layout::kEuroc;
  throw Error(ErrorKind::kInvalidArgument, "layout must be kitti or euroc, got '" + s + "'");
}

struct EmitOptions {
  std::string sequence = "00";
  std::string disparity_ext = ".png";  ///< ".png" (16-bit, 1/256 px) or ".pfm" (float32)
  int workers = 1;
};

struct EmitSummary {
  std::size_t frames = 0;
  std::size_t imu_samples = 0;
  std::size_t rendered_pixels = 0;
};

/// Rig section of a run config, so the dataset carries its own calibration.
inline std::string rig_config_text(const StereoRig& rig) {
  RunConfig c;
  c.rig = rig;
  const std::string full = dump_run_config(c);
  return full.substr(0, full.find("\n\n") + 1);
}

namespace detail {

inline void write_disparity_any(const fs::path& p, const DisparityMap& d) {
  if (p.extension() == ".pfm") {
    write_pfm(p, d);
  } else {
    write_disparity_png16(p, d);
  }
}

}  // namespace detail

/// KITTI: sequences/<id>/{calib.txt,times.txt,disparity/,oxts/} and
/// poses/<id>.txt (left-camera poses). EuRoC: mav0/{imu0,cam0,cam1,
/// disparity0,state_groundtruth_estimate0}. Both get svio.cfg with the rig.
/// No intensity images are written.
inline EmitSummary emit_dataset(const SyntheticScene& scene, Layout layout, const fs::path& root,
                                const EmitOptions& opt = {}) {
  if (opt.disparity_ext != ".png" && opt.disparity_ext != ".pfm") {
    throw Error(ErrorKind::kInvalidArgument, "disparity extension must be .png or .pfm");
  }
  fs::create_directories(root);
  const std::vector<double> times = scene.frame_times();
  std::vector<std::int64_t> t_ns;
  for (double t : times) t_ns.push_back(seconds_to_ns(t));
  const std::vector<ImuSample> imu = synthesize_imu(scene);

  std::vector<fs::path> disp_paths;
  if (layout == Layout::kKitti) {
    const fs::path seq = root / "sequences" / opt.sequence;
    write_kitti_calib(seq / "calib.txt", scene.rig);
    write_kitti_times(seq / "times.txt", t_ns);
    Trajectory cams;
    for (double t : times) cams.entries.push_back({t, scene.camera_pose(t)});
    write_kitti_poses(root / "poses" / (opt.sequence + ".txt"), cams);
    write_kitti_oxts(seq / "oxts", imu);
    for (std::size_t i = 0; i < times.size(); ++i) {
      disp_paths.push_back(kitti_disparity_path(seq, i, opt.disparity_ext));
    }
  } else {
    const fs::path mav = root / "mav0";
    write_euroc_imu(mav / "imu0" / "data.csv", imu);
    write_euroc_cam(mav / "cam0" / "data.csv", t_ns);
    write_euroc_cam(mav / "cam1" / "data.csv", t_ns);
    std::vector<EurocGtRow> gt;
    for (const auto& s : imu) {
      const AnalyticState st =
          scene.trajectory.sample(std::min(ns_to_seconds(s.t_ns), scene.trajectory.duration));
      gt.push_back({s.t_ns, st.pose, st.velocity, scene.true_bias.bg, scene.true_bias.ba});
    }
    write_euroc_groundtruth(mav / "state_groundtruth_estimate0" / "data.csv", gt);
    for (auto t : t_ns) {
      disp_paths.push_back(mav / "disparity0" / (std::to_string(t) + opt.disparity_ext));
    }
  }
  detail::write_file(root / "svio.cfg", rig_config_text(scene.rig));

  std::vector<std::size_t> pixels(times.size(), 0);
  parallel_for(times.size(), opt.workers, [&](std::size_t i) {
    const RenderedFrame f = render_frame(scene, times[i]);
    pixels[i] = f.disparity.valid_count();
    detail::write_disparity_any(disp_paths[i], f.disparity);
  });
  EmitSummary sum;
  sum.frames = times.size();
  sum.imu_samples = imu.size();
  for (auto p : pixels) sum.rendered_pixels += p;
  return sum;
}

/// Parses a dataset in the given layout with calibration and options from cfg.
inline SequenceManifest load_dataset(const fs::path& root, Layout layout, const RunConfig& cfg) {
  if (layout == Layout::kKitti) return parse_kitti_odometry(root, cfg.dataset.sequence, cfg.kitti_options());
  return parse_euroc(root, cfg.rig);
}

}  // namespace svio
