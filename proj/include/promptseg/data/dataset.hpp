// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dataset layouts and split definitions. File-backed datasets are indexed
// eagerly and decoded lazily, one sample per get().
//
//   monuseg, glas    <root>/{train,test}/images/*, <root>/{train,test}/masks/*
//   polyp-combined   <root>/train/{images,masks}/*
//                    <root>/test/<partition>/{images,masks}/*
//   sunseg           <root>/clips.json {"train": [...], "test-easy": [...], "test-hard": [...]}
//                    <root>/<clip>/{images,masks}/<frame>.*
//
// A mask matches an image with the same file stem, optionally suffixed
// "_anno" or "_mask". A <root>/manifest.json of the form
// {"train": [{"image": "...", "mask": "..."}, ...], "test": [...]} (paths
// relative to root) overrides directory discovery.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptseg/core/types.hpp"
#include "promptseg/data/image_io.hpp"
#include "promptseg/data/synthetic.hpp"

namespace promptseg {

enum class DatasetName { kMonuseg, kGlas, kPolypCombined, kSunseg, kSyntheticBlobs };
enum class Split { kTrain, kTest };

std::string to_string(DatasetName n);
DatasetName dataset_name_from_string(const std::string& s);
std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct DatasetSpec {
  DatasetName name = DatasetName::kSyntheticBlobs;
  std::string root_dir;
  std::optional<Size2> resize;  // nullopt keeps native size
  Split split = Split::kTrain;
  bool video = false;
  /// Polyp test partition ("CVC-ClinicDB", "Kvasir", "ETIS-LaribPolypDB",
  /// "CVC-ColonDB"; empty = all) or SUN-SEG test difficulty ("easy", "hard").
  std::string subset;
  SyntheticBlobsConfig synthetic;

  /// Documented defaults for `name`: resize 512 (monuseg), 224 (glas), 352
  /// (polyp-combined, sunseg), native (synthetic-blobs).
  static DatasetSpec defaults(DatasetName name, std::string root_dir, Split split);

  /// Published split size, or nullopt when there is none to check against.
  std::optional<int64_t> expected_count() const;
  MaskRule mask_rule() const;

  nlohmann::json to_json() const;
  static DatasetSpec from_json(const nlohmann::json& j);
};

struct SampleRef {
  std::string sample_id;
  std::string image_path;
  std::string mask_path;
  std::optional<int64_t> frame_index;
};

class Dataset {
 public:
  Dataset() = default;
  static Dataset from_records(std::string dataset_id, std::vector<SampleRecord> records);
  static Dataset from_refs(const DatasetSpec& spec, std::vector<SampleRef> refs);

  size_t size() const;
  bool empty() const { return size() == 0; }
  const std::string& sample_id(size_t i) const { return ids_.at(i); }
  const std::string& dataset_id() const { return dataset_id_; }

  /// Decodes (or copies) sample i. Safe to call concurrently.
  SampleRecord get(size_t i) const;

  /// Samples at the given indices, in that order.
  Dataset subset(const std::vector<size_t>& indices) const;

  /// Count mismatches and other non-fatal findings from indexing.
  std::vector<std::string> warnings;

 private:
  std::string dataset_id_;
  std::vector<std::string> ids_;
  std::vector<SampleRecord> records_;  // in-memory datasets
  std::vector<SampleRef> refs_;        // file-backed datasets
  std::optional<Size2> resize_;
  MaskRule mask_rule_ = MaskRule::kAbove127;
};

/// Indexes the dataset described by `spec` (lazy for file-backed ones).
/// Throws for a missing layout, a missing mask or a missing SUN-SEG manifest;
/// count mismatches only warn.
Dataset open_dataset(const DatasetSpec& spec);

/// Eagerly decodes every sample of open_dataset(spec).
std::vector<SampleRecord> load_dataset(const DatasetSpec& spec,
                                       std::vector<std::string>* warnings = nullptr);

/// SUN-SEG frames flattened to independent samples, frame order preserved.
std::vector<SampleRef> index_sunseg(const DatasetSpec& spec);
std::vector<SampleRecord> load_sunseg(const DatasetSpec& spec);

/// Less-than on strings comparing digit runs numerically ("f2" < "f10").
bool natural_less(const std::string& a, const std::string& b);

}  // namespace promptseg
