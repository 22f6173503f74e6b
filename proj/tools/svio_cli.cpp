// svio: batch front end over the library. Every subcommand prints a
// key=value summary on stdout; human-readable progress goes to stderr.
//
// Exit codes: 0 ok, 1 usage, 2 parse/format/config/io, 3 numeric failure
// (including more failed frame pairs than pipeline.max_failure_fraction).

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "svio/config.hpp"
#include "svio/dataset_degrade.hpp"
#include "svio/pipeline.hpp"
#include "svio/synth_emit.hpp"

namespace svio {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitNumeric = 3;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kEmptyInput:
      return kExitUsage;
    case ErrorKind::kParse:
    case ErrorKind::kFormat:
    case ErrorKind::kConfig:
    case ErrorKind::kIo:
    case ErrorKind::kMalformedStream:
      return kExitParse;
    default:
      return kExitNumeric;
  }
}

/// Ordered key=value lines, also written to <out>/summary.txt when set.
class Summary {
 public:
  template <typename T>
  void add(const std::string& key, const T& value) {
    if constexpr (std::is_floating_point_v<T>) {
      text_ += key + "=" + detail::shortest(static_cast<double>(value)) + "\n";
    } else if constexpr (std::is_same_v<T, bool>) {
      text_ += key + "=" + (value ? "true" : "false") + "\n";
    } else if constexpr (std::is_arithmetic_v<T>) {
      text_ += key + "=" + std::to_string(value) + "\n";
    } else {
      text_ += key + "=" + std::string(value) + "\n";
    }
  }
  void append(const std::string& block) { text_ += block; }
  void emit(const fs::path& file = {}) const {
    std::cout << text_;
    if (!file.empty()) detail::write_file(file, text_);
  }

 private:
  std::string text_;
};

struct Common {
  std::string config;
  std::string dataset;
  std::string layout;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App* app, Common& c, bool dataset, bool out) {
  app->add_option("--config", c.config, "run configuration file (default: <dataset>/svio.cfg if present)");
  if (dataset) app->add_option("--dataset", c.dataset, "dataset root")->required();
  app->add_option("--layout", c.layout, "dataset layout, overrides dataset.layout")
      ->check(CLI::IsMember({"kitti", "euroc"}));
  if (out) app->add_option("--out", c.out, "output directory")->required();
  app->add_option("--workers", c.workers, "worker threads, overrides pipeline.workers")
      ->check(CLI::PositiveNumber);
}

RunConfig load_config(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) {
    cfg = load_run_config(c.config);
  } else if (!c.dataset.empty() && fs::exists(fs::path(c.dataset) / "svio.cfg")) {
    cfg = load_run_config(fs::path(c.dataset) / "svio.cfg");
  } else {
    cfg = parse_run_config("", "<defaults>");
  }
  if (!c.layout.empty()) cfg.dataset.layout = c.layout;
  if (c.workers) cfg.pipeline.workers = *c.workers;
  cfg.validate();
  return cfg;
}

SequenceManifest load(const Common& c, const RunConfig& cfg) {
  return load_dataset(c.dataset, parse_layout(cfg.dataset.layout), cfg);
}

void add_eval(Summary& s, const EvalReport& r) {
  s.append(format_eval(r));
}

// ---- subcommands ----

int cmd_config(const Common& c) {
  std::cout << dump_run_config(load_config(c), true);
  std::cout << "\n# environment overrides: SVIO_<SECTION>_<KEY>, e.g. "
            << config_env_name("icp", "max_iterations") << "=30\n";
  return kExitOk;
}

int cmd_synth(const Common& c, const std::string& disparity_ext) {
  RunConfig cfg = load_config(c);
  if (c.seed) cfg.synth.scene.seed = *c.seed;
  const SyntheticScene scene = scene_from_config(cfg);
  EmitOptions opt;
  opt.sequence = cfg.dataset.sequence;
  opt.disparity_ext = disparity_ext;
  opt.workers = cfg.pipeline.workers;
  const EmitSummary e = emit_dataset(scene, parse_layout(cfg.dataset.layout), c.out, opt);
  Summary s;
  s.add("command", "synth");
  s.add("layout", cfg.dataset.layout);
  s.add("frames", e.frames);
  s.add("imu_samples", e.imu_samples);
  s.add("landmarks", scene.landmarks.size());
  s.add("rendered_pixels", e.rendered_pixels);
  s.add("seed", scene.seed);
  s.emit();
  std::cerr << "wrote " << e.frames << " frames to " << c.out << "\n";
  return kExitOk;
}

int failure_exit(std::size_t failures, std::size_t pairs, const RunConfig& cfg) {
  if (pairs == 0) return kExitOk;
  const double frac = static_cast<double>(failures) / static_cast<double>(pairs);
  return frac > cfg.pipeline.max_failure_fraction ? kExitNumeric : kExitOk;
}

void add_stereo(Summary& s, const SuperviseResult& r, const RunConfig& cfg) {
  s.add("pairs", r.pairs.size());
  s.add("failures", r.failures);
  double sum = 0.0, worst = 0.0;
  std::size_t ok = 0, fallback = 0;
  for (const auto& p : r.pairs) {
    if (!p.ok) continue;
    ++ok;
    sum += p.mean_residual;
    worst = std::max(worst, p.mean_residual);
    fallback += p.mean_residual > cfg.pipeline.fusion_max_residual;
  }
  s.add("icp_mean_residual_m", ok ? sum / static_cast<double>(ok) : 0.0);
  s.add("icp_max_residual_m", worst);
  s.add("pairs_above_fusion_residual", fallback);
}

int cmd_supervise(const Common& c, bool no_flow) {
  const RunConfig cfg = load_config(c);
  const SequenceManifest m = load(c, cfg);
  const fs::path out = c.out;
  fs::create_directories(out);
  const SuperviseResult r = supervise(m, cfg, {out, !no_flow, cfg.pipeline.workers});
  write_labels(out / "stereo_se3.txt", r.pairs);
  for (const auto& p : r.pairs) {
    if (!p.ok) std::cerr << "pair " << p.index << " failed: " << p.error << "\n";
  }
  Summary s;
  s.add("command", "supervise");
  add_stereo(s, r, cfg);
  s.add("labels", (out / "stereo_se3.txt").string());
  s.emit(out / "summary.txt");
  return failure_exit(r.failures, r.pairs.size(), cfg);
}

std::vector<PairLabel> maybe_labels(const std::string& path) {
  return path.empty() ? std::vector<PairLabel>{} : read_labels(path);
}

std::vector<ImuStatus> statuses(const std::string& bias_path, std::size_t intervals) {
  if (bias_path.empty()) return {ImuStatus{}};
  return status_per_interval(read_bias_timeline(bias_path), intervals);
}

int cmd_preintegrate(const Common& c, const std::string& labels, const std::string& bias) {
  const RunConfig cfg = load_config(c);
  const SequenceManifest m = load(c, cfg);
  const auto pairs = maybe_labels(labels);
  if (pairs.empty() && cfg.pipeline.velocity_source == "reference" && m.size() > 1) {
    throw Error(ErrorKind::kInvalidArgument,
                "--labels is required unless pipeline.velocity_source = groundtruth");
  }
  const ReferenceStates ref = reference_states(m, pairs, cfg);
  const std::size_t n = m.size() < 2 ? 0 : m.size() - 1;
  const auto ivs = preintegrate_intervals(m, ref, statuses(bias, n), cfg, cfg.pipeline.workers);
  fs::create_directories(c.out);
  write_imu_intervals(fs::path(c.out) / "imu_se3.txt", ivs);
  std::size_t failed = 0;
  for (const auto& iv : ivs) failed += !iv.ok;
  Summary s;
  s.add("command", "preintegrate");
  s.add("intervals", ivs.size());
  s.add("failures", failed);
  s.add("imu_samples", m.imu.size());
  s.emit(fs::path(c.out) / "summary.txt");
  return failure_exit(failed, ivs.size(), cfg);
}

int cmd_update_bias(const Common& c, const std::string& labels) {
  const RunConfig cfg = load_config(c);
  const SequenceManifest m = load(c, cfg);
  const auto pairs = read_labels(labels);
  const ReferenceStates ref = reference_states(m, pairs, cfg);
  const auto ws = update_bias_timeline(m, pairs, ref, cfg);
  fs::create_directories(c.out);
  write_bias_timeline(fs::path(c.out) / "bias.txt", ws);
  std::size_t updated = 0;
  for (const auto& w : ws) updated += w.updated;
  Summary s;
  s.add("command", "update-bias");
  s.add("windows", ws.size());
  s.add("updated", updated);
  if (!ws.empty()) {
    const ImuStatus& f = ws.back().status;
    for (int k = 0; k < 3; ++k) s.add("final_bg_" + std::string(1, "xyz"[k]), f.bg[k]);
    for (int k = 0; k < 3; ++k) s.add("final_ba_" + std::string(1, "xyz"[k]), f.ba[k]);
  }
  s.emit(fs::path(c.out) / "summary.txt");
  return kExitOk;
}

Trajectory gt_trajectory(const SequenceManifest& m) {
  if (!m.ground_truth) throw Error(ErrorKind::kInvalidArgument, "dataset has no ground truth");
  return *m.ground_truth;
}

int cmd_integrate(const Common& c, const std::string& labels, const std::string& bias) {
  const RunConfig cfg = load_config(c);
  const SequenceManifest m = load(c, cfg);
  const auto pairs = read_labels(labels);
  const ReferenceStates ref = reference_states(m, pairs, cfg);
  const std::size_t n = pairs.size();
  const auto st = statuses(bias, n);
  const auto ivs = preintegrate_intervals(m, ref, st, cfg, cfg.pipeline.workers);
  const auto steps = fuse(m, pairs, ivs, cfg);
  const fs::path out = c.out;
  fs::create_directories(out);
  write_fused_steps(out / "vio_se3.txt", steps);
  Summary s;
  s.add("command", "integrate");
  s.add("steps", steps.size());
  std::size_t by[3] = {0, 0, 0};
  for (const auto& x : steps) ++by[static_cast<int>(x.source)];
  s.add("steps_stereo", by[0]);
  s.add("steps_imu", by[1]);
  s.add("steps_extrapolated", by[2]);
  if (m.size() > 0) {
    const Trajectory tr = integrate_steps(steps, ref.origin, m.frame_t_ns.front());
    write_timed_poses(out / "trajectory.txt", tr);
    s.add("trajectory", (out / "trajectory.txt").string());
    if (m.ground_truth) {
      write_timed_poses(out / "groundtruth.txt", *m.ground_truth);
      s.add("groundtruth", (out / "groundtruth.txt").string());
    }
  }
  s.emit(out / "summary.txt");
  return kExitOk;
}

int cmd_eval(const Common& c, const std::string& est, const std::string& gt, int stride) {
  const Trajectory e = read_trajectory(est);
  Trajectory g;
  if (!gt.empty()) {
    g = read_trajectory(gt);
  } else if (!c.dataset.empty()) {
    const RunConfig cfg = load_config(c);
    g = gt_trajectory(load(c, cfg));
  } else {
    throw Error(ErrorKind::kInvalidArgument, "eval needs --gt or --dataset");
  }
  if (stride < 1) throw Error(ErrorKind::kInvalidArgument, "--stride must be >= 1");
  const EvalReport r = evaluate(e, g, static_cast<std::size_t>(stride));
  Summary s;
  s.add("command", "eval");
  add_eval(s, r);
  if (!c.out.empty()) fs::create_directories(c.out);
  s.emit(c.out.empty() ? fs::path() : fs::path(c.out) / "eval.txt");
  return kExitOk;
}

int cmd_degrade(const Common& c) {
  // Seeded rates fail validation without a seed, so --seed must be visible while parsing.
  if (c.seed) {
    setenv(config_env_name("degradation", "seed").c_str(), std::to_string(*c.seed).c_str(), 1);
  }
  RunConfig cfg = load_config(c);
  DegradationSpec spec = cfg.degradation;
  const DegradeSummary d =
      degrade_dataset(c.dataset, c.out, parse_layout(cfg.dataset.layout), cfg, spec);
  Summary s;
  s.add("command", "degrade");
  s.add("frames_in", d.frames_in);
  s.add("frames_out", d.frames_out);
  s.add("imu_in", d.imu_in);
  s.add("imu_out", d.imu_out);
  s.add("rig_rewritten", d.rig_rewritten);
  s.add("miscal_deg", spec.miscal_deg);
  s.add("desync_ms", spec.desync_ms);
  s.add("imu_drop_rate", spec.imu_drop_rate);
  s.add("cam_drop_rate", spec.cam_drop_rate);
  s.add("seed", spec.seed ? std::to_string(*spec.seed) : std::string("none"));
  s.emit();
  return kExitOk;
}

int cmd_flow_compare(const std::string& a, const std::string& b, const std::string& mask_a,
                     const std::string& mask_b) {
  const FlowField2D fa = mask_a.empty() ? read_flo(a) : read_flow_with_mask(a, mask_a);
  const FlowField2D fb = mask_b.empty() ? read_flo(b) : read_flow_with_mask(b, mask_b);
  const EpeResult r = epe(fa, fb);
  Summary s;
  s.add("command", "flow-compare");
  s.add("epe_mean_px", r.mean);
  s.add("epe_sum_px", r.sum);
  s.add("pixels", r.count);
  s.emit();
  return kExitOk;
}

int cmd_run(const Common& c, bool no_flow) {
  const RunConfig cfg = load_config(c);
  const SequenceManifest m = load(c, cfg);
  const fs::path out = c.out;
  fs::create_directories(out);
  const PipelineRun r = run_pipeline(m, cfg, {out, !no_flow, cfg.pipeline.workers});
  write_labels(out / "stereo_se3.txt", r.stereo.pairs);
  write_imu_intervals(out / "imu_se3.txt", r.imu);
  write_bias_timeline(out / "bias.txt", r.bias);
  write_fused_steps(out / "vio_se3.txt", r.fused);
  if (!r.trajectory.empty()) write_timed_poses(out / "trajectory.txt", r.trajectory);
  if (m.ground_truth) write_timed_poses(out / "groundtruth.txt", *m.ground_truth);
  Summary s;
  s.add("command", "run");
  add_stereo(s, r.stereo, cfg);
  s.add("imu_reintegrated", r.reintegrated);
  if (!r.bias.empty()) {
    const ImuStatus& f = r.bias.back().status;
    for (int k = 0; k < 3; ++k) s.add("final_bg_" + std::string(1, "xyz"[k]), f.bg[k]);
    for (int k = 0; k < 3; ++k) s.add("final_ba_" + std::string(1, "xyz"[k]), f.ba[k]);
  }
  if (r.eval) add_eval(s, *r.eval);
  s.emit(out / "summary.txt");
  return failure_exit(r.stereo.failures, r.stereo.pairs.size(), cfg);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"svio: stereo/IMU supervision, bias update, fusion and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "svio 0.1.0");

  Common c;
  std::string disparity_ext = ".png";
  std::string labels, bias, est, gt, mask_a, mask_b, flo_a, flo_b;
  bool no_flow = false;
  int stride = 10;

  auto* config = app.add_subcommand("config", "print every configuration key with its effective value");
  add_common(config, c, false, false);
  config->add_option("--dataset", c.dataset, "read <dataset>/svio.cfg when --config is absent");

  auto* synth = app.add_subcommand("synth", "emit a synthetic dataset");
  add_common(synth, c, false, true);
  synth->add_option("--seed", c.seed, "overrides synth.seed");
  synth->add_option("--disparity-ext", disparity_ext, "disparity file format")
      ->check(CLI::IsMember({".png", ".pfm"}))
      ->capture_default_str();

  auto* sup = app.add_subcommand("supervise", "stereo ICP labels, dense 2D flow and 3D flow per frame pair");
  add_common(sup, c, true, true);
  sup->add_flag("--no-flow", no_flow, "skip .flo/mask/PLY outputs");

  auto* pre = app.add_subcommand("preintegrate", "IMU-se3 and covariance per camera interval");
  add_common(pre, c, true, true);
  pre->add_option("--labels", labels, "stereo_se3.txt for reference velocity and attitude");
  pre->add_option("--bias", bias, "bias.txt timeline (default zero bias)");

  auto* upd = app.add_subcommand("update-bias", "windowed IMU bias estimates against stereo labels");
  add_common(upd, c, true, true);
  upd->add_option("--labels", labels, "stereo_se3.txt")->required();

  auto* integ = app.add_subcommand("integrate", "fuse stereo and IMU motion and integrate the trajectory");
  add_common(integ, c, true, true);
  integ->add_option("--labels", labels, "stereo_se3.txt")->required();
  integ->add_option("--bias", bias, "bias.txt timeline (default zero bias)");

  auto* ev = app.add_subcommand("eval", "relative errors per length and ATE");
  ev->add_option("--est", est, "estimated trajectory (12 or 13 columns)")->required();
  ev->add_option("--gt", gt, "ground-truth trajectory");
  ev->add_option("--dataset", c.dataset, "take ground truth from a dataset instead of --gt");
  ev->add_option("--config", c.config, "configuration for --dataset");
  ev->add_option("--layout", c.layout, "dataset layout")->check(CLI::IsMember({"kitti", "euroc"}));
  ev->add_option("--out", c.out, "also write <out>/eval.txt");
  ev->add_option("--stride", stride, "start-frame stride")->capture_default_str();

  auto* deg = app.add_subcommand("degrade", "apply the [degradation] settings to a dataset copy");
  add_common(deg, c, true, true);
  deg->add_option("--seed", c.seed, "overrides degradation.seed");

  auto* fc = app.add_subcommand("flow-compare", "end-point error between two .flo files");
  fc->add_option("a", flo_a, "first .flo")->required();
  fc->add_option("b", flo_b, "second .flo")->required();
  fc->add_option("--mask-a", mask_a, "mask PNG for the first field");
  fc->add_option("--mask-b", mask_b, "mask PNG for the second field");

  auto* run = app.add_subcommand("run", "supervise, preintegrate, update bias, fuse, integrate and evaluate");
  add_common(run, c, true, true);
  run->add_flag("--no-flow", no_flow, "skip .flo/mask/PLY outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (stage == "config") return cmd_config(c);
    if (stage == "synth") return cmd_synth(c, disparity_ext);
    if (stage == "supervise") return cmd_supervise(c, no_flow);
    if (stage == "preintegrate") return cmd_preintegrate(c, labels, bias);
    if (stage == "update-bias") return cmd_update_bias(c, labels);
    if (stage == "integrate") return cmd_integrate(c, labels, bias);
    if (stage == "eval") return cmd_eval(c, est, gt, stride);
    if (stage == "degrade") return cmd_degrade(c);
    if (stage == "flow-compare") return cmd_flow_compare(flo_a, flo_b, mask_a, mask_b);
    if (stage == "run") return cmd_run(c, no_flow);
  } catch (const Error& e) {
    std::cerr << "error: stage=" << stage << " kind=" << to_string(e.kind()) << " " << e.what()
              << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: stage=" << stage << " kind=io " << e.what() << "\n";
    return kExitParse;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace svio

int main(int argc, char** argv) { return svio::run_cli(argc, argv); }
