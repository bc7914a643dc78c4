// Copyright 2026 The SpoofKit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spoofkit/cli_commands.hpp"

#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>
#include <vector>

#include "spoofkit/artifact_gen.hpp"
#include "spoofkit/audio_io.hpp"
#include "spoofkit/dataset.hpp"
#include "spoofkit/errors.hpp"
#include "spoofkit/image.hpp"
#include "spoofkit/metrics.hpp"
#include "spoofkit/model.hpp"

namespace spoofkit::cli {

namespace {

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const MissingInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {  // validation / parse
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

// Per-stage seeds must match run_protocol's internal salting so that
// stage-at-a-time invocations line up with `--stage all`.
constexpr std::uint64_t kStageSalt[3] = {0x5354414745303031ULL, 0x5354414745303032ULL,
                                         0x5354414745303033ULL};

ScoreSet score_view(const DetectorModel& model, const TaskView& view,
                    std::vector<ScoreRow>* rows) {
  ScoreSet scores;
  scores.reserve(view.size());
  for (const auto& ex : view) {
    const double p = predict(model, ex.features);
    scores.push_back(ScoreItem{p, ex.label});
    if (rows) rows->emplace_back(ex.file_id, p, ex.label);
  }
  return scores;
}

}  // namespace

int cmd_import(const ImportArgs& args) {
  return guarded([&]() -> int {
    Manifest m;
    if (!args.asvspoof_protocol.empty()) {
      m = import_asvspoof_protocol(args.asvspoof_protocol, args.audio_root, args.ext);
    } else if (!args.tsv.empty()) {
      m = parse_manifest(args.tsv);
    } else {
      std::cerr << "import: need --asvspoof or --tsv\n";
      return kExitUsage;
    }
    write_manifest(m, args.out);
    std::cout << "imported " << m.records.size() << " record(s) -> " << args.out.string() << "\n";
    return kExitOk;
  });
}

int cmd_split(const SplitArgs& args) {
  return guarded([&]() -> int {
    const Manifest m = parse_manifest(args.manifest);
    const auto parts = split_random(m, args.fractions, args.seed);
    std::filesystem::create_directories(args.out_dir);
    const char* names[3] = {"train.tsv", "val.tsv", "test.tsv"};
    for (int i = 0; i < 3; ++i) {
      write_manifest(parts[static_cast<std::size_t>(i)], args.out_dir / names[i]);
      std::cout << names[i] << ": " << parts[static_cast<std::size_t>(i)].records.size()
                << " record(s)\n";
    }
    return kExitOk;
  });
}

int cmd_gen(const GenArgs& args) {
  return guarded([&]() -> int {
    const Manifest m = parse_manifest(args.manifest);
    const GenResult result = generate_artifact_set(m, args.artifact, args.out_dir, args.params);
    const auto manifest_out =
        args.manifest_out.empty() ? args.out_dir / "manifest.tsv" : args.manifest_out;
    write_manifest(result.artifacts, manifest_out);
    std::cout << "generated " << result.n_generated << " artifact clip(s), skipped "
              << result.n_skipped_no_real << " (no same-speaker real), failed "
              << result.n_failed << "\n";
    return result.n_failed > 0 ? kExitData : kExitOk;
  });
}

int cmd_featurize(const FeaturizeArgs& args) {
  return guarded([&]() -> int {
    const Manifest m = parse_manifest(args.manifest);
    std::filesystem::create_directories(args.out_dir);
    if (!args.render_dir.empty()) std::filesystem::create_directories(args.render_dir);

    // Fail fast on absent inputs; corrupt ones are reported at the end.
    for (const auto& rec : m.records) {
      if (!std::filesystem::exists(rec.path)) {
        throw MissingInputError("featurize: missing audio file: " + rec.path.string());
      }
    }

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failed{0};
    auto work = [&] {
      for (std::size_t i = next.fetch_add(1); i < m.records.size(); i = next.fetch_add(1)) {
        const auto& rec = m.records[i];
        try {
          const Waveform w = standardize(load_wav(rec.path), args.standardize_seconds,
                                         args.standardize_rate);
          const MelSpectrogram mel = mel_spectrogram(w, args.mel);
          write_melf(mel, args.out_dir / (rec.file_id + ".melf"));
          if (!args.render_dir.empty()) {
            write_png(render_image(mel), args.render_dir / (rec.file_id + ".png"));
          }
        } catch (const std::exception& e) {
          std::cerr << "featurize: " << rec.file_id << ": " << e.what() << "\n";
          failed.fetch_add(1);
        }
      }
    };

    const int jobs = std::max(1, args.jobs);
    if (jobs == 1) {
      work();
    } else {
      std::vector<std::thread> workers;
      for (int t = 0; t < jobs; ++t) workers.emplace_back(work);
      for (auto& w : workers) w.join();
    }

    std::cout << "featurized " << (m.records.size() - failed.load()) << "/" << m.records.size()
              << " record(s) -> " << args.out_dir.string() << "\n";
    return failed.load() > 0 ? kExitData : kExitOk;
  });
}

int cmd_train(const TrainArgs& args) {
  return guarded([&]() -> int {
    if (args.stage != "all" && args.stage != "baseline" && args.stage != "adm" &&
        args.stage != "final") {
      std::cerr << "train: unknown stage '" << args.stage << "'\n";
      return kExitUsage;
    }

    const Manifest main_manifest = parse_manifest(args.manifest);
    std::filesystem::create_directories(args.out_dir);

    const bool needs_main = args.stage == "all" || args.stage == "baseline" ||
                            args.stage == "final";
    const bool needs_adm = args.stage == "all" || args.stage == "adm";

    TaskView main_view;
    if (needs_main) {
      main_view = build_task_view({&main_manifest}, Task::main, args.features);
    }
    TaskView adm_view;
    if (needs_adm) {
      if (args.artifact_manifest.empty()) {
        throw ValidationError("train: the adm stage needs --artifact-manifest");
      }
      const Manifest artifact_manifest = parse_manifest(args.artifact_manifest);
      adm_view = build_task_view({&main_manifest, &artifact_manifest}, Task::adm, args.features);
    }

    TrainConfig cfg = args.train;
    if (args.stage == "all") {
      const ProtocolResult result = run_protocol(main_view, adm_view, cfg);
      save_checkpoint(result.baseline, args.out_dir / "baseline.spfw");
      save_checkpoint(result.adm, args.out_dir / "adm.spfw");
      save_checkpoint(result.final_model, args.out_dir / "final.spfw");
      write_history_csv(result.baseline_history, args.out_dir / "history_baseline.csv");
      write_history_csv(result.adm_history, args.out_dir / "history_adm.csv");
      write_history_csv(result.final_history, args.out_dir / "history_final.csv");
      std::cout << "wrote baseline.spfw, adm.spfw, final.spfw -> " << args.out_dir.string()
                << "\n";
      return kExitOk;
    }

    if (args.stage == "baseline") {
      DetectorModel model = DetectorModel::init(cfg.seed, main_view.front().features.n_mels,
                                                main_view.front().features.n_frames);
      model.set_input_stats(main_view);
      TrainConfig stage_cfg = cfg;
      stage_cfg.seed = Rng::splitmix(cfg.seed ^ kStageSalt[0]);
      const auto history = train_stage(model, main_view, stage_cfg, Freeze::none);
      save_checkpoint(model, args.out_dir / "baseline.spfw");
      write_history_csv(history, args.out_dir / "history_baseline.csv");
    } else if (args.stage == "adm") {
      DetectorModel model = load_checkpoint(args.out_dir / "baseline.spfw");
      TrainConfig stage_cfg = cfg;
      stage_cfg.seed = Rng::splitmix(cfg.seed ^ kStageSalt[1]);
      const auto history = train_stage(model, adm_view, stage_cfg, Freeze::extractor);
      save_checkpoint(model, args.out_dir / "adm.spfw");
      write_history_csv(history, args.out_dir / "history_adm.csv");
    } else {
      DetectorModel model = load_checkpoint(args.out_dir / "adm.spfw");
      TrainConfig stage_cfg = cfg;
      stage_cfg.seed = Rng::splitmix(cfg.seed ^ kStageSalt[2]);
      const auto history = train_stage(model, main_view, stage_cfg, Freeze::none);
      save_checkpoint(model, args.out_dir / "final.spfw");
      write_history_csv(history, args.out_dir / "history_final.csv");
    }
    std::cout << "wrote " << args.stage << ".spfw -> " << args.out_dir.string() << "\n";
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args) {
  return guarded([&]() -> int {
    if (args.task != "main" && args.task != "adm") {
      std::cerr << "eval: unknown task '" << args.task << "'\n";
      return kExitUsage;
    }
    const DetectorModel model = load_checkpoint(args.checkpoint);

    const Manifest m = parse_manifest(args.manifest);
    std::vector<const Manifest*> manifests{&m};
    Manifest artifact_manifest;
    if (!args.artifact_manifest.empty()) {
      artifact_manifest = parse_manifest(args.artifact_manifest);
      manifests.push_back(&artifact_manifest);
    }
    const Task task = args.task == "main" ? Task::main : Task::adm;
    const TaskView view = build_task_view(manifests, task, args.features);

    std::vector<ScoreRow> rows;
    const ScoreSet scores = score_view(model, view, &rows);
    const Report report = compute_report(scores);
    write_report_json(report, args.report_out);
    if (!args.scores_out.empty()) write_scores_csv(rows, args.scores_out);

    std::cout << report_table(report, task == Task::main ? "real" : "artifact");
    return kExitOk;
  });
}

int cmd_embed(const EmbedArgs& args) {
  return guarded([&]() -> int {
    const DetectorModel model = load_checkpoint(args.checkpoint);
    const Manifest m = parse_manifest(args.manifest);

    std::ofstream f(args.out, std::ios::trunc);
    if (!f) throw IoError("embed: cannot open for writing: " + args.out.string());
    f << "file_id,label";
    for (int i = 0; i < DetectorModel::kEmbedDim; ++i) f << ",e" << i;
    f << "\n";
    f.precision(17);

    for (const auto& rec : m.records) {
      const auto feature_path = args.features / (rec.file_id + ".melf");
      if (!std::filesystem::exists(feature_path)) {
        throw MissingInputError("embed: missing feature file: " + feature_path.string());
      }
      const MelSpectrogram mel = read_melf(feature_path);
      const std::vector<double> e = embed(model, mel);
      f << rec.file_id << ',' << label_name(rec.label);
      for (double v : e) f << ',' << v;
      f << '\n';
    }
    if (!f) throw IoError("embed: write failed: " + args.out.string());
    std::cout << "wrote embeddings for " << m.records.size() << " record(s) -> "
              << args.out.string() << "\n";
    return kExitOk;
  });
}

}  // namespace spoofkit::cli
