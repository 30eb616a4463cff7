#include "mambatrack/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "mambatrack/checkpoint.hpp"
#include "mambatrack/config.hpp"
#include "mambatrack/metrics.hpp"
#include "mambatrack/mot_io.hpp"
#include "mambatrack/scene.hpp"
#include "mambatrack/tracker.hpp"
#include "mambatrack/train.hpp"

namespace fs = std::filesystem;

namespace mambatrack {

namespace {

AppConfig config_or_default(const std::string& path) {
  return path.empty() ? AppConfig{} : load_config(path);
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

int cmd_synth(const std::string& config_path, const std::string& out_dir, std::ostream& out) {
  const AppConfig cfg = load_config(config_path);
  fs::create_directories(out_dir);
  for (int i = 0; i < cfg.num_scenes; ++i) {
    SceneConfig sc = cfg.scene;
    sc.seed = cfg.scene.seed + static_cast<std::uint64_t>(i);
    const Scene scene = generate_scene(sc);
    fs::path dir = out_dir;
    if (cfg.num_scenes > 1) {
      char name[32];
      std::snprintf(name, sizeof name, "scene_%03d", i);
      dir /= name;
      fs::create_directories(dir);
    }
    write_mot_file(scene.ground_truth, (dir / "gt.txt").string());
    write_mot_file(scene.detections, (dir / "det.txt").string());
    out << "wrote " << (dir / "gt.txt").string() << " and det.txt (" << scene.ground_truth.size()
        << " gt boxes, " << scene.detections.size() << " detections)\n";
  }
  return 0;
}

std::vector<std::string> find_gt_files(const std::string& data) {
  std::vector<std::string> files;
  if (fs::is_regular_file(data)) return {data};
  if (!fs::is_directory(data)) throw FormatError("training data not found: " + data);
  for (const auto& entry : fs::recursive_directory_iterator(data))
    if (entry.is_regular_file() && entry.path().filename() == "gt.txt") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw FormatError("no gt.txt files under " + data);
  return files;
}

int cmd_train(const std::string& config_path, const std::string& data, const std::string& model_out,
              std::string loss_csv, std::ostream& out) {
  const AppConfig cfg = load_config(config_path);
  std::vector<WindowSample> windows;
  for (const std::string& f : find_gt_files(data)) {
    const auto tracks = to_tracklets(read_mot_file(f));
    auto w = build_windows(tracks, cfg.train.q, cfg.scene.image);
    windows.insert(windows.end(), w.begin(), w.end());
  }
  if (windows.empty()) throw FormatError("no training windows: tracks shorter than q + 2 frames");
  MtpModel model = init_mtp_model(cfg.train.model_config(), cfg.train.seed);
  const TrainResult result = train(windows, cfg.train, model);
  ensure_parent(model_out);
  save_checkpoint(model, model_out);
  if (loss_csv.empty()) loss_csv = model_out + ".loss.csv";
  ensure_parent(loss_csv);
  write_loss_csv(result.curve, loss_csv);
  out << "trained on " << windows.size() << " windows, " << result.curve.size() << " steps";
  if (!result.curve.empty()) out << ", final loss " << result.curve.back().loss;
  out << "\nwrote " << model_out << " and " << loss_csv << "\n";
  return 0;
}

int cmd_track(const std::string& config_path, const std::string& det, const std::string& model_path,
              const std::string& res, const std::string& motion, bool no_tpm, std::ostream& out) {
  AppConfig cfg = config_or_default(config_path);
  if (!motion.empty()) cfg.tracker.motion = parse_motion_kind(motion);
  if (no_tpm) cfg.tracker.tpm = false;
  std::optional<MtpModel> model;
  if (cfg.tracker.motion == MotionKind::mtp) {
    if (model_path.empty()) throw CLI::RequiredError("--model is required with --motion mtp");
    model = load_checkpoint(model_path);
  }
  const auto detections = to_detections(read_mot_file(det));
  const auto tracks = track_sequence(detections, model ? &*model : nullptr, cfg.tracker);
  ensure_parent(res);
  write_mot_file(to_records(tracks), res);
  out << "wrote " << tracks.size() << " track boxes to " << res << "\n";
  return 0;
}

int cmd_eval(const std::string& gt_path, const std::string& res_path, const std::string& csv, double iou_min,
             std::ostream& out) {
  const MetricReport report = evaluate(read_mot_file(gt_path), read_mot_file(res_path), iou_min);
  write_report_table(out, report);
  if (!csv.empty()) {
    ensure_parent(csv);
    std::ofstream f(csv);
    if (!f) throw Error("cannot write " + csv);
    write_report_csv(f, report);
  }
  return 0;
}

int cmd_demo_predict(const std::string& config_path, const std::string& model_path,
                     const std::string& track_file, std::size_t steps, std::optional<int> id,
                     std::ostream& out) {
  const AppConfig cfg = config_or_default(config_path);
  const MtpModel model = load_checkpoint(model_path);
  const auto tracks = to_tracklets(read_mot_file(track_file));
  if (tracks.empty()) throw FormatError(track_file + ": no boxes");
  const Tracklet* chosen = &tracks.front();
  if (id) {
    const auto it = std::find_if(tracks.begin(), tracks.end(), [&](const Tracklet& t) { return t.id == *id; });
    if (it == tracks.end()) throw FormatError(track_file + ": no identity " + std::to_string(*id));
    chosen = &*it;
  }
  std::vector<MotRecord> rows;
  int frame = chosen->last_frame();
  for (const BBox& b : rollout(model, *chosen, cfg.tracker.image, steps)) rows.push_back({++frame, chosen->id, b, 1.0});
  format_mot(out, rows);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory-prediction multi-object tracker"};
  app.name("mambatrack");
  app.require_subcommand(1);

  std::string config, out_path, data, det, model, res, motion, gt, csv, loss_csv, track_file;
  bool no_tpm = false;
  double iou_min = 0.5;
  std::size_t steps = 1;
  int id = -1;

  auto* synth = app.add_subcommand("synth", "Generate synthetic scenes (gt.txt and det.txt)");
  synth->add_option("--config", config, "Config file")->required();
  synth->add_option("--out", out_path, "Output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train the motion predictor on gt tracks");
  train_cmd->add_option("--config", config, "Config file")->required();
  train_cmd->add_option("--data", data, "Directory searched for gt.txt, or a single file")->required();
  train_cmd->add_option("--out", out_path, "Checkpoint path")->required();
  train_cmd->add_option("--loss-csv", loss_csv, "Loss curve path (default <out>.loss.csv)");

  auto* track = app.add_subcommand("track", "Track detections");
  track->add_option("--config", config, "Config file");
  track->add_option("--det", det, "Detections in MOT format")->required();
  track->add_option("--model", model, "Checkpoint, needed for mtp motion");
  track->add_option("--out", res, "Result path")->required();
  track->add_option("--motion", motion, "mtp, kf or none")->check(CLI::IsMember({"mtp", "kf", "none"}));
  track->add_flag("--no-tpm", no_tpm, "Disable second-stage re-finding and patching");

  auto* eval = app.add_subcommand("eval", "Score tracking results against ground truth");
  eval->add_option("--gt", gt, "Ground truth in MOT format")->required();
  eval->add_option("--res", res, "Results in MOT format")->required();
  eval->add_option("--csv", csv, "Also write metric,value CSV here");
  eval->add_option("--iou", iou_min, "Overlap needed for a match")->check(CLI::Range(0.0, 1.0));

  auto* demo = app.add_subcommand("demo-predict", "Print an autoregressive rollout of one track");
  demo->add_option("--config", config, "Config file (image size)");
  demo->add_option("--model", model, "Checkpoint")->required();
  demo->add_option("--track-file", track_file, "Track in MOT format")->required();
  demo->add_option("--steps", steps, "Number of predicted boxes")->check(CLI::PositiveNumber);
  auto* id_opt = demo->add_option("--id", id, "Identity to extend (default: lowest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1]))
      err << "error: unknown subcommand '" << argv[1] << "'\n" << app.help();
    else
      err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(config, out_path, out);
    if (train_cmd->parsed()) return cmd_train(config, data, out_path, loss_csv, out);
    if (track->parsed()) return cmd_track(config, det, model, res, motion, no_tpm, out);
    if (eval->parsed()) return cmd_eval(gt, res, csv, iou_min, out);
    if (demo->parsed())
      return cmd_demo_predict(config, model, track_file, steps,
                              id_opt->count() ? std::optional<int>(id) : std::nullopt, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace mambatrack
