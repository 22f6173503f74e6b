#pragma once

// Applies a DegradationSpec to an on-disk dataset. The input tree is copied
// and only the degraded parts are rewritten, so an all-zero spec yields a
// byte-identical copy.

#include <string>
#include <vector>

#include "svio/config.hpp"
#include "svio/degradation.hpp"
#include "svio/synth_emit.hpp"

namespace svio {

struct DegradeSummary {
  std::size_t frames_in = 0;
  std::size_t frames_out = 0;
  std::size_t imu_in = 0;
  std::size_t imu_out = 0;
  bool rig_rewritten = false;
};

namespace detail {

inline std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> out;
  for_each_line(text, [&](long, std::string_view l) {
    if (!trim(l).empty()) out.emplace_back(l);
  });
  return out;
}

inline void copy_if_exists(const fs::path& from, const fs::path& to) {
  if (!fs::exists(from)) return;
  fs::create_directories(to.parent_path());
  fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

}  // namespace detail

inline DegradeSummary degrade_dataset(const fs::path& in, const fs::path& out, Layout layout,
                                      const RunConfig& cfg, const DegradationSpec& spec) {
  spec.validate();
  if (fs::exists(out) && !fs::is_empty(out)) {
    throw Error(ErrorKind::kInvalidArgument, "output directory " + out.string() + " is not empty");
  }
  if (layout == Layout::kKitti && !cfg.dataset.oxts_root.empty() && spec.any()) {
    throw Error(ErrorKind::kInvalidArgument,
                "degrade rewrites the IMU stream in place; dataset.oxts_root must be unset");
  }
  const SequenceManifest m = load_dataset(in, layout, cfg);
  fs::create_directories(out);
  fs::copy(in, out, fs::copy_options::recursive);
  DegradeSummary sum;
  sum.frames_in = sum.frames_out = m.size();
  sum.imu_in = sum.imu_out = m.imu.size();
  if (!spec.any()) return sum;
  const std::uint64_t seed = spec.seed.value_or(0);

  if (spec.miscal_deg != 0.0) {
    detail::write_file(out / "svio.cfg", rig_config_text(miscalibrate(m.rig, spec.miscal_deg, seed)));
    sum.rig_rewritten = true;
  }

  if (spec.desync_ms != 0.0 || spec.imu_drop_rate > 0.0) {
    std::vector<ImuSample> imu = desync(m.imu, spec.desync_ms, spec.desync_mode, seed);
    imu = drop_imu(imu, spec.imu_drop_rate, seed);
    sum.imu_out = imu.size();
    if (layout == Layout::kKitti) {
      const fs::path oxts = out / "sequences" / cfg.dataset.sequence / "oxts";
      fs::remove_all(oxts);
      for (auto& s : imu) s.t_ns += cfg.dataset.oxts_time_offset_ns;
      write_kitti_oxts(oxts, imu);
    } else {
      write_euroc_imu(out / "mav0" / "imu0" / "data.csv", imu);
    }
  }

  if (spec.cam_drop_rate > 0.0) {
    const std::vector<std::size_t> keep = surviving_frames(m.size(), spec.cam_drop_rate, seed);
    sum.frames_out = keep.size();
    if (layout == Layout::kKitti) {
      const fs::path seq_in = in / "sequences" / cfg.dataset.sequence;
      const fs::path seq_out = out / "sequences" / cfg.dataset.sequence;
      const auto times = detail::nonempty_lines(detail::read_file(seq_in / "times.txt"));
      const fs::path poses_in = in / "poses" / (cfg.dataset.sequence + ".txt");
      const auto poses =
          fs::exists(poses_in) ? detail::nonempty_lines(detail::read_file(poses_in))
                               : std::vector<std::string>{};
      std::string t_text, p_text;
      for (auto k : keep) {
        t_text += times[k] + "\n";
        if (!poses.empty()) p_text += poses[k] + "\n";
      }
      detail::write_file(seq_out / "times.txt", t_text);
      if (!poses.empty()) detail::write_file(out / "poses" / (cfg.dataset.sequence + ".txt"), p_text);
      for (const auto& dir : {std::string("disparity"), cfg.dataset.left_dir, cfg.dataset.right_dir}) {
        fs::remove_all(seq_out / dir);
      }
      for (std::size_t j = 0; j < keep.size(); ++j) {
        const std::size_t k = keep[j];
        const fs::path d = m.disparity[k];
        detail::copy_if_exists(d, kitti_disparity_path(seq_out, j, d.extension().string()));
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.png", j);
        detail::copy_if_exists(m.left_images[k], seq_out / cfg.dataset.left_dir / name);
        detail::copy_if_exists(m.right_images[k], seq_out / cfg.dataset.right_dir / name);
      }
    } else {
      const fs::path mav_in = in / "mav0";
      const fs::path mav_out = out / "mav0";
      for (const char* cam : {"cam0", "cam1"}) {
        const fs::path csv = mav_in / cam / "data.csv";
        if (!fs::exists(csv)) continue;
        const auto rows = parse_euroc_cam(csv);
        std::string text = "#timestamp [ns],filename\n";
        std::vector<char> kept(rows.size(), 0);
        for (auto k : keep) {
          if (k < rows.size()) kept[k] = 1;
        }
        for (std::size_t k = 0; k < rows.size(); ++k) {
          if (kept[k]) {
            text += std::to_string(rows[k].t_ns) + "," + rows[k].filename + "\n";
          } else {
            fs::remove(mav_out / cam / "data" / rows[k].filename);
          }
        }
        detail::write_file(mav_out / cam / "data.csv", text);
      }
      std::vector<char> kept(m.size(), 0);
      for (auto k : keep) kept[k] = 1;
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (!kept[k]) fs::remove(mav_out / fs::relative(m.disparity[k], mav_in));
      }
    }
  }
  return sum;
}

}  // namespace svio
