// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// promptseg: train, evaluate and run prompt generators against a frozen
// segmenter.
//
//   promptseg train           --config run.json [overrides]
//   promptseg train-surrogate --config run.json --generator g.ckpt [overrides]
//   promptseg eval            --checkpoint best.ckpt [--baseline point|mask] [overrides]
//   promptseg infer           --checkpoint best.ckpt --out masks/ img1.png img2.png
//   promptseg report          a.json b.json [--out table.csv]
//
// Settings resolve in order: built-in recipe (or the config stored in the
// checkpoint for eval/infer), then --config, then flags, then --set entries.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <c10/util/Logging.h>
#include <nlohmann/json.hpp>

#include "promptseg/core/errors.hpp"
#include "promptseg/training/checkpoint.hpp"
#include "promptseg/training/config.hpp"
#include "promptseg/training/evaluation.hpp"
#include "promptseg/training/surrogate_trainer.hpp"
#include "promptseg/training/trainer.hpp"

using namespace promptseg;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<double> learning_rate;
  std::optional<double> weight_decay;
  std::optional<int64_t> batch_size;
  std::optional<int64_t> max_epochs;
  std::optional<int64_t> max_steps;
  std::optional<uint64_t> seed;
  std::optional<std::string> checkpoint_dir;
  std::optional<std::string> dataset;
  std::optional<std::string> data_dir;
  std::optional<std::string> split;
  std::optional<std::string> subset;
  std::optional<std::string> backend;
  std::optional<std::string> weights;
  std::optional<std::string> generator;
  std::optional<std::string> augmentation;
  std::vector<std::string> set;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "JSON config file (comments allowed)")
        ->check(CLI::ExistingFile);
    app->add_option("--lr", learning_rate, "learning_rate");
    app->add_option("--weight-decay", weight_decay, "weight_decay");
    app->add_option("--batch-size", batch_size, "batch_size");
    app->add_option("--epochs", max_epochs, "max_epochs");
    app->add_option("--max-steps", max_steps, "max_steps (0: no cap)");
    app->add_option("--seed", seed, "seed");
    app->add_option("--checkpoint-dir", checkpoint_dir, "checkpoint_dir");
    app->add_option("--dataset", dataset,
                    "dataset.name: monuseg, glas, polyp-combined, sunseg, synthetic-blobs");
    app->add_option("--data-dir", data_dir,
                    "dataset.root_dir (relative paths resolve against $PROMPTSEG_DATA_ROOT)");
    app->add_option("--split", split, "dataset.split: train or test");
    app->add_option("--subset", subset, "dataset.subset: polyp partition or sunseg difficulty");
    app->add_option("--backend", backend, "backend.kind: foundation or stub");
    app->add_option("--weights", weights, "backend.weights_path");
    app->add_option("--generator-config", generator, "generator.backbone: hardnet85 or tiny-test");
    app->add_option("--augmentation", augmentation, "augmentation recipe, 'auto' or 'none'");
    app->add_option("--set", set, "key.path=value, value parsed as JSON or taken as a string");
  }

  json patch() const {
    json j = json::object();
    if (learning_rate) j["learning_rate"] = *learning_rate;
    if (weight_decay) j["weight_decay"] = *weight_decay;
    if (batch_size) j["batch_size"] = *batch_size;
    if (max_epochs) j["max_epochs"] = *max_epochs;
    if (max_steps) j["max_steps"] = *max_steps;
    if (seed) j["seed"] = *seed;
    if (checkpoint_dir) j["checkpoint_dir"] = *checkpoint_dir;
    if (augmentation) j["augmentation"] = *augmentation;
    if (dataset) j["dataset"]["name"] = *dataset;
    if (data_dir) j["dataset"]["root_dir"] = *data_dir;
    if (split) j["dataset"]["split"] = *split;
    if (subset) j["dataset"]["subset"] = *subset;
    if (backend) j["backend"]["kind"] = *backend;
    if (weights) j["backend"]["weights_path"] = *weights;
    if (generator) j["generator"]["backbone"] = *generator;
    for (const auto& entry : set) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw CLI::ValidationError("--set", "expected key.path=value, got '" + entry + "'");
      }
      json value;
      try {
        value = json::parse(entry.substr(eq + 1));
      } catch (const json::parse_error&) {
        value = entry.substr(eq + 1);
      }
      std::string pointer = "/" + entry.substr(0, eq);
      for (auto& ch : pointer) {
        if (ch == '.') ch = '/';
      }
      j[json::json_pointer(pointer)] = value;
    }
    return j;
  }

  TrainConfig apply(TrainConfig base) const {
    if (!config_path.empty()) base = load_train_config(config_path, base);
    return TrainConfig::from_json(patch(), base);
  }
};

std::string option_or(const std::string& value, const std::string& fallback) {
  return value.empty() ? fallback : value;
}

DatasetSpec resolved(DatasetSpec spec) {
  spec.root_dir = resolve_data_root(spec.root_dir);
  return spec;
}

Dataset open_resolved(const DatasetSpec& spec) {
  auto data = open_dataset(resolved(spec));
  for (const auto& w : data.warnings) LOG(WARNING) << w;
  return data;
}

void print_fit(const FitResult& r) {
  if (!r.epochs.empty()) {
    const auto& last = r.epochs.back();
    std::cout << "epoch " << last.epoch << " step " << last.global_step << " train_loss "
              << last.train_loss << " val_dice " << last.val_dice << "\n";
  }
  std::cout << (r.stopped_by_step_limit ? "stopped at max_steps, " : "finished, ")
            << "global_step " << r.state.global_step << ", best val Dice "
            << r.state.best_val_dice << "\n"
            << "log:   " << r.log_path.string() << "\n"
            << "final: " << r.final_checkpoint.string() << "\n";
}

TrainConfig config_from_checkpoint(const std::string& path) {
  const auto c = load_checkpoint(path);
  if (!c.config.contains("train")) return TrainConfig::generator_recipe();
  return TrainConfig::from_json(c.config.at("train"));
}

int run_train(const Overrides& o, const std::string& resume, bool print_only) {
  auto config = o.apply(TrainConfig::generator_recipe());
  config.validate();
  if (print_only) {
    std::cout << config.to_json().dump(2) << "\n";
    return 0;
  }
  print_fit(train_generator(config, resume));
  return 0;
}

int run_train_surrogate(const Overrides& o, const std::string& generator_ckpt,
                        const std::string& resume, bool print_only) {
  auto config = o.apply(TrainConfig::surrogate_recipe());
  if (!generator_ckpt.empty()) config.generator_checkpoint = generator_ckpt;
  if (config.generator_checkpoint.empty()) {
    throw std::invalid_argument("train-surrogate needs --generator or generator_checkpoint");
  }
  config.validate();
  if (print_only) {
    std::cout << config.to_json().dump(2) << "\n";
    return 0;
  }
  print_fit(train_surrogate(config, resume));
  return 0;
}

int run_eval(const Overrides& o, const std::string& checkpoint, const std::string& baseline,
             const std::string& generator_ckpt, const std::string& out, unsigned threads) {
  TrainConfig base = checkpoint.empty() ? TrainConfig::generator_recipe()
                                        : config_from_checkpoint(checkpoint);
  base.dataset.split = Split::kTest;
  const auto config = o.apply(base);
  const auto data = open_resolved(config.dataset);
  std::cout << "evaluating " << data.size() << " samples of " << data.dataset_id() << "\n";

  MetricReport report;
  if (!baseline.empty()) {
    const auto kind = baseline == "point" ? BaselinePrompt::kPoint : BaselinePrompt::kGtMask;
    auto backend = make_backend(config.backend);
    report = evaluate_baseline(*backend, kind, data, {}, threads);
  } else {
    if (checkpoint.empty()) throw std::invalid_argument("eval needs --checkpoint or --baseline");
    const auto c = load_checkpoint(checkpoint);
    if (c.kind == CheckpointKind::kSurrogate) {
      auto h = load_surrogate(checkpoint);
      const auto g_path = option_or(generator_ckpt, config.generator_checkpoint);
      auto g = load_generator(g_path);
      const auto digest =
          snapshot_parameters(*g, SnapshotScope::kParametersAndBuffers).global_checksum;
      if (digest != c.generator_digest) {
        LOG(WARNING) << "generator '" << g_path << "' differs from the one the surrogate was "
                     << "trained against";
      }
      report = evaluate_surrogate(*h, *g, data, {}, threads);
    } else {
      auto g = load_generator(checkpoint);
      auto backend = make_backend(config.backend);
      report = evaluate(*g, *backend, data, {}, threads);
    }
  }
  report.save(out);
  report.write_csv(std::cout);
  std::cout << "wrote " << out << ".csv and " << out << ".json\n";
  return 0;
}

int run_infer(const Overrides& o, const std::string& checkpoint, const std::string& out_dir,
              const std::vector<std::string>& images, bool probabilities, bool native_input) {
  const auto config = o.apply(config_from_checkpoint(checkpoint));
  auto g = load_generator(checkpoint);
  auto backend = make_backend(config.backend);
  InferOptions options;
  options.save_probabilities = probabilities;
  if (!native_input) options.input_size = config.dataset.resize;
  const auto result = infer(*g, *backend, images, out_dir, options);
  for (const auto& path : result.written) std::cout << path << "\n";
  for (const auto& [path, message] : result.errors) {
    std::cerr << "error: " << path << ": " << message << "\n";
  }
  return result.errors.empty() ? 0 : 2;
}

int run_report(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<std::pair<std::string, MetricReport>> reports;
  for (const auto& path : inputs) {
    reports.emplace_back(std::filesystem::path(path).stem().string(), MetricReport::load(path));
  }
  if (out.empty()) {
    write_summary_csv(std::cout, reports);
    return 0;
  }
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot write '" + out + "'");
  write_summary_csv(os, reports);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt-generator training for a frozen promptable segmenter"};
  app.require_subcommand(1);

  Overrides train_o;
  std::string train_resume;
  bool train_print = false;
  auto* train = app.add_subcommand("train", "train the prompt generator g");
  train_o.attach(train);
  train->add_option("--resume", train_resume, "resume from a last.ckpt")->check(CLI::ExistingFile);
  train->add_flag("--print-config", train_print, "print the effective config and exit");

  Overrides sur_o;
  std::string sur_generator;
  std::string sur_resume;
  bool sur_print = false;
  auto* sur = app.add_subcommand("train-surrogate", "train the surrogate decoder h on a fixed g");
  sur_o.attach(sur);
  sur->add_option("--generator", sur_generator, "checkpoint of the fixed g")
      ->check(CLI::ExistingFile);
  sur->add_option("--resume", sur_resume, "resume from a last.ckpt")->check(CLI::ExistingFile);
  sur->add_flag("--print-config", sur_print, "print the effective config and exit");

  Overrides eval_o;
  std::string eval_ckpt;
  std::string eval_baseline;
  std::string eval_generator;
  std::string eval_out = "report";
  unsigned eval_threads = 0;
  auto* ev = app.add_subcommand("eval", "score a checkpoint on a dataset split (default: test)");
  eval_o.attach(ev);
  ev->add_option("--checkpoint", eval_ckpt, "generator or surrogate checkpoint")
      ->check(CLI::ExistingFile);
  ev->add_option("--baseline", eval_baseline, "score the backend's own prompt encoder instead")
      ->check(CLI::IsMember({"point", "mask"}));
  ev->add_option("--generator", eval_generator, "g for a surrogate checkpoint")
      ->check(CLI::ExistingFile);
  ev->add_option("-o,--out", eval_out, "report path stem (.csv and .json are appended)");
  ev->add_option("--threads", eval_threads, "metric workers (0: all cores)");

  Overrides infer_o;
  std::string infer_ckpt;
  std::string infer_out = "masks";
  std::vector<std::string> infer_images;
  bool infer_prob = false;
  bool infer_native = false;
  auto* inf = app.add_subcommand("infer", "write binary masks for image files");
  infer_o.attach(inf);
  inf->add_option("--checkpoint", infer_ckpt, "generator checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  inf->add_option("-o,--out", infer_out, "output directory");
  inf->add_flag("--probabilities", infer_prob, "also write 8-bit probability maps");
  inf->add_flag("--native", infer_native, "skip the training-time resize of the input");
  inf->add_option("images", infer_images, "input images");

  std::vector<std::string> report_inputs;
  std::string report_out;
  auto* rep = app.add_subcommand("report", "tabulate the mean rows of several eval reports");
  rep->add_option("reports", report_inputs, "report .json files")
      ->required()
      ->check(CLI::ExistingFile);
  rep->add_option("-o,--out", report_out, "CSV output (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(train_o, train_resume, train_print);
    if (*sur) return run_train_surrogate(sur_o, sur_generator, sur_resume, sur_print);
    if (*ev) return run_eval(eval_o, eval_ckpt, eval_baseline, eval_generator, eval_out, eval_threads);
    if (*inf) return run_infer(infer_o, infer_ckpt, infer_out, infer_images, infer_prob, infer_native);
    if (*rep) return run_report(report_inputs, report_out);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
