#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bog/detector.hpp"
#include "bog/errors.hpp"
#include "bog/io.hpp"
#include "bog/pipeline.hpp"

namespace {

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '#';
  }
  return true;
}

void print_event(const bog::DetectionEvent& e) {
  std::cout << e.class_id << ',' << e.start_frame << ',' << e.end_frame << ',' << e.trigger_frame
            << ',' << bog::format_double(e.score) << std::endl;  // flush per event on purpose
}

/// Frame-per-line skeleton text on stdin, detection events on stdout as soon
/// as they fire.
void detect_from_stdin(const bog::PipelineConfig& cfg) {
  const bog::SkeletonTopology topo = bog::pipeline_topology(cfg);
  const bog::Codebook cb = bog::load_codebook(cfg.codebook_path);
  std::vector<bog::ClassModel> models;
  {
    // Reuse the detect command's model loading via a tiny shim: the models
    // directory layout is the single source of truth.
    namespace fsux = std::filesystem;
    for (const auto& e : fsux::directory_iterator(cfg.models_dir)) {
      const std::string name = e.path().filename().string();
      if (name.rfind("model_", 0) == 0 && e.path().extension() == ".txt") {
        models.push_back(bog::load_model(e.path().string()));
      }
    }
    std::sort(models.begin(), models.end(),
              [](const bog::ClassModel& a, const bog::ClassModel& b) {
                return a.class_id < b.class_id;
              });
    if (models.empty()) throw bog::DataError("no model_*.txt files in " + cfg.models_dir);
  }
  bog::StreamingDetector det(topo, cfg.descriptor, cb, models, cfg.m, cfg.smoothing, cfg.patience);

  std::cout << "class_id,start_frame,end_frame,trigger_frame,score" << std::endl;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(std::cin, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    const bog::SkeletonFrame frame = bog::parse_frame_line(line, topo.joint_count(), line_no);
    for (const bog::DetectionEvent& e : det.push(frame)) print_event(e);
  }
  for (const bog::DetectionEvent& e : det.finish()) print_event(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bag-of-gesturelets action detection pipeline"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "pipeline config file (key = value lines)");
  app.add_option("--override", overrides, "override one config key as key=value (repeatable)");

  CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic train/test corpus");
  CLI::App* c_extract =
      app.add_subcommand("extract", "dump per-frame descriptors for the training corpus");
  CLI::App* c_train_cb =
      app.add_subcommand("train-codebook", "cluster training descriptors into a codebook");
  CLI::App* c_train =
      app.add_subcommand("train", "train one-vs-all models and firing thresholds");
  CLI::App* c_det_off = app.add_subcommand(
      "detect-offline", "segment test sequences by repeated masked max-subarray search");
  CLI::App* c_det_on =
      app.add_subcommand("detect-online", "stream test sequences through the online detector");
  bool from_stdin = false;
  c_det_on->add_flag("--stdin", from_stdin,
                     "read one skeleton-text frame per line from stdin, print events as they fire");
  CLI::App* c_eval = app.add_subcommand("eval", "score detections against annotations");
  CLI::App* c_bench =
      app.add_subcommand("bench", "measure streaming and offline detection cost");
  CLI::App* c_sweep = app.add_subcommand("sweep", "recognition accuracy curves over K and m");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    bog::PipelineConfig cfg = bog::load_pipeline_config(config_path);
    for (const std::string& ov : overrides) {
      const std::size_t eq = ov.find('=');
      if (eq == std::string::npos) {
        std::cerr << "--override needs key=value, got '" << ov << "'\n";
        return 1;
      }
      bog::apply_config_value(cfg, ov.substr(0, eq), ov.substr(eq + 1));
    }

    if (c_synth->parsed()) {
      bog::run_synth(cfg, std::cout);
    } else if (c_extract->parsed()) {
      bog::run_extract(cfg, std::cout);
    } else if (c_train_cb->parsed()) {
      bog::run_train_codebook(cfg, std::cout);
    } else if (c_train->parsed()) {
      bog::run_train(cfg, std::cout);
    } else if (c_det_off->parsed()) {
      bog::run_detect(cfg, false, std::cout);
    } else if (c_det_on->parsed()) {
      if (from_stdin) {
        detect_from_stdin(cfg);
      } else {
        bog::run_detect(cfg, true, std::cout);
      }
    } else if (c_eval->parsed()) {
      bog::run_eval(cfg, std::cout);
    } else if (c_bench->parsed()) {
      bog::run_bench(cfg, std::cout);
    } else if (c_sweep->parsed()) {
      bog::run_sweep(cfg, std::cout);
    }
  } catch (const bog::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
