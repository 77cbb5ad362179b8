// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "promptseg/core/errors.hpp"
#include "promptseg/core/parameter_snapshot.hpp"
#include "promptseg/data/image_io.hpp"
#include "promptseg/data/synthetic.hpp"
#include "promptseg/segmenter/stub_backend.hpp"
#include "promptseg/training/checkpoint.hpp"
#include "promptseg/training/config.hpp"
#include "promptseg/training/evaluation.hpp"
#include "promptseg/training/surrogate_trainer.hpp"
#include "promptseg/training/trainer.hpp"

using namespace promptseg;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("promptseg_train_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrainConfig tiny_config(const std::string& name) {
  TrainConfig c = TrainConfig::generator_recipe();
  c.generator = GeneratorConfig::tiny_test();
  c.generator.seed = 21;
  c.backend = BackendConfig::stub(64);
  c.dataset = DatasetSpec::defaults(DatasetName::kSyntheticBlobs, "", Split::kTrain);
  c.dataset.synthetic.count = 8;
  c.dataset.synthetic.size = 64;
  c.batch_size = 4;
  c.max_epochs = 2;
  c.val_fraction = 0.25;
  c.augmentation = "none";
  c.checkpoint_dir = temp_dir(name).string();
  return c;
}

Dataset blobs(int64_t count, int64_t size = 64, uint64_t seed = 7) {
  SyntheticBlobsConfig c;
  c.count = count;
  c.size = size;
  c.seed = seed;
  return Dataset::from_records("synthetic-blobs", synthetic_blobs(c));
}

std::vector<SampleRecord> records(const Dataset& d) {
  std::vector<SampleRecord> out;
  for (size_t i = 0; i < d.size(); ++i) out.push_back(d.get(i));
  return out;
}

ParameterSnapshot full_snapshot(const torch::nn::Module& m) {
  return snapshot_parameters(m, SnapshotScope::kParametersAndBuffers);
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST(Trainer, BackendStaysFrozen) {
  auto config = tiny_config("frozen");
  config.check_frozen_every_step = true;
  GeneratorTrainer trainer(config);
  const auto backend_before = trainer.backend().snapshot();
  const auto g_before = snapshot_parameters(*trainer.generator());
  const auto batch = records(blobs(4));
  for (int i = 0; i < 25; ++i) trainer.train_step(batch);
  EXPECT_EQ(trainer.backend().snapshot(), backend_before);
  EXPECT_FALSE(snapshot_parameters(*trainer.generator()) == g_before);
  EXPECT_EQ(trainer.state().global_step, 25);

  // Tampering with the backend is caught.
  auto& stub = dynamic_cast<StubBackend&>(trainer.backend());
  {
    torch::NoGradGuard no_grad;
    stub.net()->head->bias.add_(1e-3);
  }
  EXPECT_THROW(trainer.check_frozen(), FrozenInvariantViolation);
  EXPECT_THROW(trainer.train_step(batch), FrozenInvariantViolation);
}

TEST(Trainer, ZeroLearningRateKeepsGenerator) {
  auto config = tiny_config("lr0");
  config.learning_rate = 0.0;
  config.weight_decay = 0.0;
  GeneratorTrainer trainer(config);
  const auto before = snapshot_parameters(*trainer.generator());
  const auto batch = records(blobs(4));
  for (int i = 0; i < 5; ++i) trainer.train_step(batch);
  EXPECT_EQ(snapshot_parameters(*trainer.generator()), before);
}

TEST(Trainer, LossDecreasesEarly) {
  GeneratorTrainer trainer(tiny_config("decrease"));
  const auto batch = records(blobs(4));
  std::vector<double> losses;
  for (int i = 0; i < 20; ++i) losses.push_back(trainer.train_step(batch).loss);
  const double first = (losses[0] + losses[1] + losses[2] + losses[3] + losses[4]) / 5.0;
  const double last = (losses[15] + losses[16] + losses[17] + losses[18] + losses[19]) / 5.0;
  EXPECT_LT(last, first);
}

TEST(Trainer, SameSeedReplaysExactly) {
  const auto batch = records(blobs(4));
  std::vector<StepResult> a_steps, b_steps;
  GeneratorTrainer a(tiny_config("replay_a"));
  for (int i = 0; i < 10; ++i) a_steps.push_back(a.train_step(batch));
  const auto a_snap = full_snapshot(*a.generator());
  GeneratorTrainer b(tiny_config("replay_b"));
  for (int i = 0; i < 10; ++i) b_steps.push_back(b.train_step(batch));
  EXPECT_EQ(full_snapshot(*b.generator()), a_snap);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a_steps[i].loss, b_steps[i].loss) << i;
}

TEST(Trainer, NonFiniteLossIsReported) {
  GeneratorTrainer trainer(tiny_config("nan"));
  {
    torch::NoGradGuard no_grad;
    trainer.generator()->up2->conv2->weight.fill_(std::nan(""));
  }
  try {
    trainer.train_step(records(blobs(2)));
    FAIL() << "NaN loss accepted";
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite loss"), std::string::npos);
  }
  auto bad = torch::rand({1, 3, 64, 64});
  bad[0][1][2][3] = INFINITY;
  GeneratorTrainer other(tiny_config("inf"));
  EXPECT_THROW(other.train_step(bad, torch::zeros({1, 1, 64, 64})), NonFiniteError);
  EXPECT_THROW(other.train_step(torch::rand({2, 3, 64, 64}), torch::zeros({2, 64, 64})), ShapeError);
}

TEST(Trainer, UnwritableCheckpointDirFailsBeforeTraining) {
  const auto dir = temp_dir("unwritable");
  std::ofstream(dir / "file") << "x";
  auto config = tiny_config("unwritable_cfg");
  config.checkpoint_dir = (dir / "file" / "sub").string();
  GeneratorTrainer trainer(config);
  const auto data = blobs(4);
  EXPECT_THROW(trainer.fit(data, data), std::runtime_error);
  EXPECT_EQ(trainer.state().global_step, 0);
}

TEST(Trainer, FitWritesCheckpointsAndLog) {
  auto config = tiny_config("fit");
  config.cosine_decay = true;
  GeneratorTrainer trainer(config);
  int callbacks = 0;
  trainer.set_step_callback([&callbacks](int64_t, const StepResult&) { ++callbacks; });
  const auto [train, val] = holdout_split(blobs(8), config.val_fraction, config.seed);
  const auto result = trainer.fit(train, val);
  EXPECT_EQ(callbacks, 4);
  EXPECT_FALSE(result.stopped_by_step_limit);
  ASSERT_EQ(result.epochs.size(), 2u);
  EXPECT_EQ(result.state.epoch, 2);
  EXPECT_EQ(result.state.global_step, 4);
  // Cosine schedule over 4 steps: half way after epoch 0, zero at the end.
  EXPECT_NEAR(result.epochs[0].learning_rate, 0.5 * config.learning_rate, 1e-15);
  EXPECT_NEAR(result.epochs[1].learning_rate, 0.0, 1e-15);
  for (const auto& p : {result.last_checkpoint, result.best_checkpoint, result.final_checkpoint,
                        result.log_path}) {
    EXPECT_TRUE(fs::exists(p)) << p;
  }
  EXPECT_FALSE(fs::exists(fs::path(config.checkpoint_dir) / ".write_probe"));

  const auto lines = read_lines(result.log_path);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0],
            "epoch,global_step,lr,train_loss,train_bce,train_dice_loss,train_dice,val_dice,seconds");
  EXPECT_EQ(std::count(lines[1].begin(), lines[1].end(), ','), 8);
  EXPECT_EQ(lines[2].substr(0, 4), "1,4,");

  const auto last = load_checkpoint(result.last_checkpoint.string());
  ASSERT_TRUE(last.state.has_value());
  EXPECT_EQ(last.state->global_step, 4);
  EXPECT_FALSE(load_checkpoint(result.final_checkpoint.string()).state.has_value());
  auto final_g = load_generator(result.final_checkpoint.string());
  EXPECT_EQ(full_snapshot(*final_g), full_snapshot(*trainer.generator()));
  const auto best = load_checkpoint(result.best_checkpoint.string());
  EXPECT_EQ(best.config.at("train").at("batch_size"), 4);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto config = tiny_config("ckpt");
  GeneratorTrainer trainer(config);
  trainer.train_step(records(blobs(4)));
  const auto path = fs::path(config.checkpoint_dir) / "step.ckpt";
  save_checkpoint(path.string(), trainer.make_checkpoint(true));
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));

  const auto c = load_checkpoint(path.string());
  EXPECT_EQ(c.format_version, kCheckpointFormatVersion);
  EXPECT_EQ(c.kind, CheckpointKind::kGenerator);
  EXPECT_EQ(c.config.at("model"), trainer.generator()->config().to_json());
  ASSERT_TRUE(c.state.has_value());
  EXPECT_EQ(c.state->global_step, 1);
  EXPECT_FALSE(c.state->optimizer_state.empty());
  EXPECT_TRUE(c.state->torch_rng_state.defined());

  const auto live = capture_module(*trainer.generator(), CheckpointKind::kGenerator, {});
  ASSERT_EQ(c.parameters.size(), live.parameters.size());
  for (size_t i = 0; i < live.parameters.size(); ++i) {
    EXPECT_EQ(c.parameters[i].first, live.parameters[i].first);
    EXPECT_TRUE(torch::equal(c.parameters[i].second, live.parameters[i].second));
  }
  ASSERT_EQ(c.buffers.size(), live.buffers.size());
  for (size_t i = 0; i < live.buffers.size(); ++i) {
    EXPECT_TRUE(torch::equal(c.buffers[i].second, live.buffers[i].second));
  }

  auto g = load_generator(path.string());
  EXPECT_FALSE(g->config().pretrained_backbone);
  EXPECT_EQ(full_snapshot(*g), full_snapshot(*trainer.generator()));

  EXPECT_THROW(load_surrogate(path.string()), std::runtime_error);
  EXPECT_THROW(load_checkpoint((fs::path(config.checkpoint_dir) / "none.ckpt").string()),
               MissingWeightsError);

  auto wrong = build_prompt_generator(GeneratorConfig::hardnet85());
  EXPECT_THROW(restore_module(*wrong, c), std::runtime_error);

  auto future = c;
  future.format_version = kCheckpointFormatVersion + 1;
  save_checkpoint((fs::path(config.checkpoint_dir) / "future.ckpt").string(), future);
  EXPECT_THROW(load_checkpoint((fs::path(config.checkpoint_dir) / "future.ckpt").string()),
               std::runtime_error);
}

TEST(Checkpoint, ResumeMatchesUninterruptedRun) {
  auto full_config = tiny_config("resume_full");
  full_config.augmentation = "glas";
  const auto [train, val] = holdout_split(blobs(10), 0.2, full_config.seed);

  GeneratorTrainer uninterrupted(full_config);
  const auto full = uninterrupted.fit(train, val);
  ASSERT_EQ(full.state.global_step, 4);

  auto part_config = full_config;
  part_config.checkpoint_dir = temp_dir("resume_part").string();
  part_config.max_steps = 3;
  FitResult first_leg;
  {
    GeneratorTrainer interrupted(part_config);
    first_leg = interrupted.fit(train, val);
  }
  EXPECT_TRUE(first_leg.stopped_by_step_limit);
  EXPECT_EQ(first_leg.state.global_step, 3);
  EXPECT_EQ(first_leg.state.epoch, 1);
  EXPECT_EQ(first_leg.state.next_batch, 1);

  // Disturb the global generator between legs; resume must restore it.
  torch::rand({100});
  auto resume_config = part_config;
  resume_config.max_steps = 0;
  GeneratorTrainer resumed(resume_config);
  resumed.resume(first_leg.last_checkpoint.string());
  EXPECT_EQ(resumed.state().global_step, 3);
  const auto second_leg = resumed.fit(train, val);
  EXPECT_EQ(second_leg.state.global_step, 4);
  EXPECT_EQ(full_snapshot(*resumed.generator()), full_snapshot(*uninterrupted.generator()));

  // The resumed log continues the interrupted one and ends on the same row.
  const auto full_log = read_lines(full.log_path);
  const auto resumed_log = read_lines(second_leg.log_path);
  ASSERT_EQ(full_log.size(), 3u);
  ASSERT_EQ(resumed_log.size(), 3u);
  auto without_time = [](const std::string& row) { return row.substr(0, row.rfind(',')); };
  EXPECT_EQ(without_time(resumed_log[1]), without_time(full_log[1]));
  EXPECT_EQ(without_time(resumed_log[2]), without_time(full_log[2]));

  // A generator run cannot resume from a stateless checkpoint.
  GeneratorTrainer again(resume_config);
  EXPECT_THROW(again.resume(second_leg.final_checkpoint.string()), std::runtime_error);
}

TEST(Trainer, HoldoutSplit) {
  const auto data = blobs(10, 32);
  const auto [train, val] = holdout_split(data, 0.2, 5);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(val.size(), 2u);
  std::set<std::string> seen;
  for (size_t i = 0; i < train.size(); ++i) seen.insert(train.sample_id(i));
  for (size_t i = 0; i < val.size(); ++i) seen.insert(val.sample_id(i));
  EXPECT_EQ(seen.size(), 10u);
  const auto again = holdout_split(data, 0.2, 5);
  EXPECT_EQ(again.second.sample_id(0), val.sample_id(0));
  EXPECT_EQ(again.second.sample_id(1), val.sample_id(1));
  bool differs = false;
  for (uint64_t seed = 6; seed < 12 && !differs; ++seed) {
    const auto other = holdout_split(data, 0.2, seed).second;
    differs = other.sample_id(0) != val.sample_id(0) || other.sample_id(1) != val.sample_id(1);
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(holdout_split(data, 0.01, 5).second.size(), 1u);
  const auto none = holdout_split(data, 0.0, 5);
  EXPECT_EQ(none.first.size(), 10u);
  EXPECT_EQ(none.second.size(), 10u);
  EXPECT_THROW(holdout_split(blobs(2, 32), 0.9, 5), std::invalid_argument);
  EXPECT_THROW(holdout_split(data, 1.0, 5), std::invalid_argument);
}

TEST(Trainer, CollateAndBatchDice) {
  auto mixed = records(blobs(1, 64));
  mixed.push_back(records(blobs(1, 32)).front());
  EXPECT_THROW(collate(mixed), ShapeError);
  EXPECT_THROW(collate({}), std::invalid_argument);
  const auto [images, masks] = collate(records(blobs(3, 32)));
  EXPECT_EQ(images.sizes(), (std::vector<int64_t>{3, 3, 32, 32}));
  EXPECT_EQ(masks.sizes(), (std::vector<int64_t>{3, 1, 32, 32}));
  EXPECT_EQ(masks.scalar_type(), torch::kFloat32);

  // Sample 0: 2 predicted, 1 of 2 GT hit, Dice 0.5. Sample 1: both empty, Dice 1.
  auto logits = torch::full({2, 1, 2, 2}, -5.0);
  logits[0][0][0][0] = 5.0;
  logits[0][0][0][1] = 5.0;
  auto gt = torch::zeros({2, 1, 2, 2});
  gt[0][0][0][0] = 1.0;
  gt[0][0][1][1] = 1.0;
  EXPECT_DOUBLE_EQ(batch_dice(logits, gt), 0.75);
}

TEST(SurrogateTrainer, NeedsGeneratorAndGuardsDigest) {
  auto config = tiny_config("surrogate");
  EXPECT_THROW(SurrogateTrainer{config}, std::invalid_argument);

  // Save a g checkpoint and train h on it.
  GeneratorTrainer gt(config);
  const auto g_path = fs::path(config.checkpoint_dir) / "g.ckpt";
  save_checkpoint(g_path.string(), gt.make_checkpoint(false));
  auto sconfig = config;
  sconfig.generator_checkpoint = g_path.string();
  SurrogateTrainer trainer(sconfig);
  const auto g_before = full_snapshot(*trainer.generator());
  EXPECT_EQ(g_before.global_checksum, trainer.generator_digest());
  const auto batch = records(blobs(4));
  for (int i = 0; i < 3; ++i) trainer.train_step(batch);
  EXPECT_EQ(full_snapshot(*trainer.generator()), g_before);
  EXPECT_FALSE(trainer.generator()->is_training());

  const auto h_path = fs::path(config.checkpoint_dir) / "h.ckpt";
  save_checkpoint(h_path.string(), trainer.make_checkpoint(true));
  const auto saved = load_checkpoint(h_path.string());
  EXPECT_EQ(saved.kind, CheckpointKind::kSurrogate);
  EXPECT_EQ(saved.generator_digest, trainer.generator_digest());
  EXPECT_EQ(full_snapshot(*load_surrogate(h_path.string())), full_snapshot(*trainer.decoder()));
  EXPECT_THROW(load_generator(h_path.string()), std::runtime_error);

  SurrogateTrainer same(sconfig);
  EXPECT_NO_THROW(same.resume(h_path.string()));
  EXPECT_EQ(same.state().global_step, 3);

  auto other_g = GeneratorConfig::tiny_test();
  other_g.seed = 99;
  SurrogateTrainer different(sconfig, build_surrogate_decoder(), build_prompt_generator(other_g));
  EXPECT_THROW(different.resume(h_path.string()), std::runtime_error);

  GeneratorTrainer wrong_kind(config);
  EXPECT_THROW(wrong_kind.resume(h_path.string()), std::runtime_error);

  {
    torch::NoGradGuard no_grad;
    trainer.generator()->up1->conv1->bias.add_(1.0);
  }
  EXPECT_THROW(trainer.check_frozen(), FrozenInvariantViolation);
}

TEST(Evaluation, ScoresEverySample) {
  auto g = build_prompt_generator(GeneratorConfig::tiny_test());
  StubBackend backend(BackendConfig::stub(64));
  const auto data = blobs(3, 48);
  const auto probs = predict_probabilities(*g, backend, data.get(0).image, 40, 56);
  EXPECT_EQ(probs.sizes(), (std::vector<int64_t>{40, 56}));
  EXPECT_GE(probs.min().item<double>(), 0.0);
  EXPECT_LE(probs.max().item<double>(), 1.0);
  EXPECT_TRUE(g->is_training());

  const auto one = evaluate(*g, backend, data, {}, 1);
  const auto two = evaluate(*g, backend, data, {}, 2);
  ASSERT_EQ(one.per_sample.size(), 3u);
  EXPECT_EQ(one.to_json(), two.to_json());
  for (const auto& s : one.per_sample) {
    for (double v : {s.dice, s.iou, s.sen, s.f_beta, s.f_beta_w, s.s_alpha, s.e_phi_mn}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }

  auto h = build_surrogate_decoder();
  EXPECT_EQ(evaluate_surrogate(*h, *g, data).per_sample.size(), 3u);
  EXPECT_THROW(evaluate_baseline(backend, BaselinePrompt::kGtMask, data), UnsupportedOperation);

  // Metric rasters.
  auto mask = torch::zeros({3, 3}, torch::kUInt8);
  mask[1][1] = 1;
  EXPECT_EQ(to_binary_map(Mask(mask)).height, 3);
  EXPECT_THROW(to_prob_map(torch::zeros({3})), ShapeError);
}

TEST(Evaluation, InferWritesMasksAndReportsBadFiles) {
  auto g = build_prompt_generator(GeneratorConfig::tiny_test());
  StubBackend backend(BackendConfig::stub(64));
  const auto dir = temp_dir("infer");
  save_image_png((dir / "a.png").string(), Image(torch::rand({3, 50, 70})));
  save_image_png((dir / "b.png").string(), Image(torch::rand({3, 64, 64})));
  std::ofstream(dir / "broken.png") << "not an image";

  InferOptions options;
  options.input_size = Size2{64, 64};
  options.save_probabilities = true;
  const auto result = infer(*g, backend,
                            {(dir / "a.png").string(), (dir / "broken.png").string(),
                             (dir / "b.png").string()},
                            dir / "out", options);
  ASSERT_EQ(result.written.size(), 2u);
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_EQ(result.errors[0].first, (dir / "broken.png").string());
  EXPECT_TRUE(fs::exists(dir / "out/a_mask.png"));
  EXPECT_TRUE(fs::exists(dir / "out/a_prob.png"));
  EXPECT_EQ(image_size((dir / "out/a_mask.png").string()), (Size2{50, 70}));

  // The mask is the probability map thresholded at 0.5 (inclusive).
  const auto mask = load_mask((dir / "out/b_mask.png").string(), MaskRule::kNonZero);
  const auto expected = predict_probabilities(*g, backend, load_image((dir / "b.png").string()), 64, 64);
  EXPECT_TRUE(torch::equal(mask.pixels(), (expected >= 0.5).to(torch::kUInt8)));

  EXPECT_TRUE(infer(*g, backend, {}, dir / "empty").written.empty());
}

TEST(Config, JsonOverlayAndFiles) {
  const auto base = TrainConfig::generator_recipe();
  EXPECT_EQ(base.batch_size, 10);
  EXPECT_EQ(base.max_epochs, 200);
  EXPECT_EQ(TrainConfig::surrogate_recipe().batch_size, 24);
  EXPECT_EQ(TrainConfig::surrogate_recipe().max_epochs, 60);

  const auto c = TrainConfig::from_json({{"learning_rate", 1e-3},
                                         {"generator", {{"backbone", "tiny-test"}, {"seed", 4}}},
                                         {"backend", {{"kind", "frozen-stub"}, {"input_resolution", 128}}},
                                         {"dataset", {{"name", "polyp-combined"}, {"split", "test"}}}},
                                        base);
  EXPECT_EQ(c.learning_rate, 1e-3);
  EXPECT_EQ(c.batch_size, base.batch_size);
  EXPECT_EQ(c.generator.backbone, Backbone::kTinyTest);
  EXPECT_EQ(c.generator.seed, 4u);
  EXPECT_EQ(c.generator.growth_rates, GeneratorConfig::tiny_test().growth_rates);
  EXPECT_EQ(c.generator.encoder_block_channels, GeneratorConfig::tiny_test().encoder_block_channels);
  EXPECT_EQ(c.generator.dropout, 0.0);
  EXPECT_EQ(c.backend.kind, BackendKind::kFrozenStub);
  EXPECT_EQ(c.backend.input_resolution, 128);
  EXPECT_EQ(c.dataset.resize, (Size2{352, 352}));
  EXPECT_EQ(c.dataset.split, Split::kTest);
  EXPECT_EQ(TrainConfig::from_json(c.to_json()).to_json(), c.to_json());

  const auto dir = temp_dir("config");
  std::ofstream(dir / "run.json") << "{\n  // comment\n  \"batch_size\": 3\n}\n";
  EXPECT_EQ(load_train_config((dir / "run.json").string(), base).batch_size, 3);
  std::ofstream(dir / "bad.json") << "{ batch_size: }";
  EXPECT_THROW(load_train_config((dir / "bad.json").string(), base), std::runtime_error);
  EXPECT_THROW(load_train_config((dir / "missing.json").string(), base), std::runtime_error);
  EXPECT_THROW(TrainConfig::from_json({{"validation_fraction", 0.5}}, base), std::invalid_argument);
  EXPECT_THROW(TrainConfig::from_json({{"dataset", {{"synthetic", {{"cnt", 2}}}}}}, base),
               std::invalid_argument);
  EXPECT_THROW(TrainConfig::from_json(nlohmann::json::array(), base), std::invalid_argument);

  auto invalid = base;
  invalid.batch_size = 0;
  EXPECT_THROW(invalid.validate(), std::invalid_argument);
  invalid = base;
  invalid.val_fraction = 1.0;
  EXPECT_THROW(invalid.validate(), std::invalid_argument);
}

TEST(Config, DataRootFromEnvironment) {
  ::unsetenv(kDataRootEnv);
  EXPECT_EQ(resolve_data_root("glas"), "glas");
  ::setenv(kDataRootEnv, "/datasets", 1);
  EXPECT_EQ(resolve_data_root("glas"), "/datasets/glas");
  EXPECT_EQ(resolve_data_root("/abs/glas"), "/abs/glas");
  EXPECT_EQ(resolve_data_root(""), "");
  ::unsetenv(kDataRootEnv);
}

TEST(Trainer, TrainGeneratorEndToEnd) {
  auto config = tiny_config("end_to_end");
  config.max_epochs = 1;
  const auto result = train_generator(config);
  EXPECT_EQ(result.epochs.size(), 1u);
  EXPECT_EQ(result.state.global_step, 2);  // 6 training samples, batch 4
  EXPECT_TRUE(fs::exists(result.final_checkpoint));
}
