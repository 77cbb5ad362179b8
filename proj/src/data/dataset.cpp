// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/data/dataset.hpp"

#include <c10/util/Logging.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace promptseg {

namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<std::string, int64_t>>& polyp_partitions() {
  static const std::vector<std::pair<std::string, int64_t>> parts{
      {"CVC-ClinicDB", 100}, {"Kvasir", 64}, {"ETIS-LaribPolypDB", 196}, {"CVC-ColonDB", 380}};
  return parts;
}

bool is_raster(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".tif" || ext == ".tiff" ||
         ext == ".bmp";
}

std::vector<fs::path> list_rasters(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("dataset layout: directory '" + dir.string() + "' not found");
  }
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_raster(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return natural_less(a.filename().string(), b.filename().string());
  });
  return out;
}

// Pairs every image in images_dir with its mask in masks_dir.
std::vector<SampleRef> pair_directory(const fs::path& images_dir, const fs::path& masks_dir,
                                      const std::string& id_prefix) {
  std::map<std::string, fs::path> masks;
  for (const auto& m : list_rasters(masks_dir)) masks.emplace(m.stem().string(), m);
  std::vector<SampleRef> refs;
  for (const auto& img : list_rasters(images_dir)) {
    const std::string stem = img.stem().string();
    auto it = masks.end();
    for (const char* suffix : {"", "_anno", "_mask"}) {
      it = masks.find(stem + suffix);
      if (it != masks.end()) break;
    }
    if (it == masks.end()) {
      throw std::runtime_error("dataset: no mask for image '" + img.string() + "' in '" +
                               masks_dir.string() + "'");
    }
    refs.push_back({id_prefix + stem, img.string(), it->second.string(), std::nullopt});
  }
  return refs;
}

std::vector<SampleRef> from_manifest(const fs::path& root, const fs::path& manifest, Split split) {
  std::ifstream in(manifest);
  const auto j = nlohmann::json::parse(in);
  const std::string key = to_string(split);
  if (!j.contains(key)) {
    throw std::runtime_error("manifest '" + manifest.string() + "' has no '" + key + "' list");
  }
  std::vector<SampleRef> refs;
  for (const auto& e : j.at(key)) {
    SampleRef r;
    r.image_path = (root / e.at("image").get<std::string>()).string();
    r.mask_path = (root / e.at("mask").get<std::string>()).string();
    r.sample_id = e.value("id", fs::path(r.image_path).stem().string());
    if (e.contains("frame_index")) r.frame_index = e.at("frame_index").get<int64_t>();
    if (!fs::exists(r.mask_path)) {
      throw std::runtime_error("dataset: mask '" + r.mask_path + "' listed in manifest is missing");
    }
    refs.push_back(std::move(r));
  }
  return refs;
}

std::optional<int64_t> trailing_number(const std::string& s) {
  size_t end = s.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(s[end - 1]))) --end;
  size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(s[begin - 1]))) --begin;
  if (begin == end) return std::nullopt;
  return std::stoll(s.substr(begin, end - begin));
}

}  // namespace

std::string to_string(DatasetName n) {
  switch (n) {
    case DatasetName::kMonuseg:
      return "monuseg";
    case DatasetName::kGlas:
      return "glas";
    case DatasetName::kPolypCombined:
      return "polyp-combined";
    case DatasetName::kSunseg:
      return "sunseg";
    case DatasetName::kSyntheticBlobs:
      return "synthetic-blobs";
  }
  return "unknown";
}

DatasetName dataset_name_from_string(const std::string& s) {
  for (auto n : {DatasetName::kMonuseg, DatasetName::kGlas, DatasetName::kPolypCombined,
                 DatasetName::kSunseg, DatasetName::kSyntheticBlobs}) {
    if (to_string(n) == s) return n;
  }
  throw std::invalid_argument("unknown dataset '" + s + "'");
}

std::string to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + s + "'");
}

DatasetSpec DatasetSpec::defaults(DatasetName name, std::string root_dir, Split split) {
  DatasetSpec s;
  s.name = name;
  s.root_dir = std::move(root_dir);
  s.split = split;
  switch (name) {
    case DatasetName::kMonuseg:
      s.resize = Size2{512, 512};
      break;
    case DatasetName::kGlas:
      s.resize = Size2{224, 224};
      break;
    case DatasetName::kPolypCombined:
      s.resize = Size2{352, 352};
      break;
    case DatasetName::kSunseg:
      s.resize = Size2{352, 352};
      s.video = true;
      break;
    case DatasetName::kSyntheticBlobs:
      break;
  }
  return s;
}

std::optional<int64_t> DatasetSpec::expected_count() const {
  const bool train = split == Split::kTrain;
  switch (name) {
    case DatasetName::kMonuseg:
      return train ? 30 : 14;
    case DatasetName::kGlas:
      return train ? 85 : 80;
    case DatasetName::kPolypCombined: {
      if (train) return 1448;
      int64_t total = 0;
      for (const auto& [part, n] : polyp_partitions()) {
        if (subset.empty()) total += n;
        if (part == subset) return n;
      }
      return subset.empty() ? std::optional<int64_t>(total) : std::nullopt;
    }
    case DatasetName::kSunseg:
      return std::nullopt;
    case DatasetName::kSyntheticBlobs:
      return synthetic.count;
  }
  return std::nullopt;
}

MaskRule DatasetSpec::mask_rule() const {
  return name == DatasetName::kGlas ? MaskRule::kNonZero : MaskRule::kAbove127;
}

nlohmann::json DatasetSpec::to_json() const {
  nlohmann::json j{{"name", to_string(name)},
                   {"root_dir", root_dir},
                   {"split", to_string(split)},
                   {"video", video},
                   {"subset", subset},
                   {"synthetic",
                    {{"count", synthetic.count},
                     {"size", synthetic.size},
                     {"seed", synthetic.seed},
                     {"noise_std", synthetic.noise_std}}}};
  j["resize"] = resize ? nlohmann::json::array({resize->first, resize->second}) : nlohmann::json();
  return j;
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
  const auto name = dataset_name_from_string(j.value("name", std::string("synthetic-blobs")));
  const auto split = split_from_string(j.value("split", std::string("train")));
  DatasetSpec s = defaults(name, j.value("root_dir", std::string()), split);
  if (j.contains("resize")) {
    const auto& r = j.at("resize");
    if (r.is_null()) {
      s.resize.reset();
    } else if (r.is_number_integer()) {
      s.resize = Size2{r.get<int64_t>(), r.get<int64_t>()};
    } else {
      s.resize = Size2{r.at(0).get<int64_t>(), r.at(1).get<int64_t>()};
    }
  }
  s.video = j.value("video", s.video);
  s.subset = j.value("subset", s.subset);
  if (j.contains("synthetic")) {
    const auto& g = j.at("synthetic");
    s.synthetic.count = g.value("count", s.synthetic.count);
    s.synthetic.size = g.value("size", s.synthetic.size);
    s.synthetic.seed = g.value("seed", s.synthetic.seed);
    s.synthetic.noise_std = g.value("noise_std", s.synthetic.noise_std);
  }
  return s;
}

Dataset Dataset::from_records(std::string dataset_id, std::vector<SampleRecord> records) {
  Dataset d;
  d.dataset_id_ = std::move(dataset_id);
  for (const auto& r : records) d.ids_.push_back(r.source_path);
  d.records_ = std::move(records);
  return d;
}

Dataset Dataset::from_refs(const DatasetSpec& spec, std::vector<SampleRef> refs) {
  Dataset d;
  d.dataset_id_ = to_string(spec.name);
  for (const auto& r : refs) d.ids_.push_back(r.sample_id);
  d.refs_ = std::move(refs);
  d.resize_ = spec.resize;
  d.mask_rule_ = spec.mask_rule();
  return d;
}

size_t Dataset::size() const { return ids_.size(); }

SampleRecord Dataset::get(size_t i) const {
  if (i >= size()) throw std::out_of_range("dataset index out of range");
  if (!records_.empty()) return records_[i];
  const auto& ref = refs_[i];
  auto image = load_image(ref.image_path, resize_);
  auto mask = load_mask(ref.mask_path, mask_rule_,
                        resize_ ? resize_ : std::optional<Size2>(Size2{image.height(), image.width()}));
  return SampleRecord::make(std::move(image), std::move(mask), dataset_id_, ref.image_path,
                            ref.frame_index);
}

Dataset Dataset::subset(const std::vector<size_t>& indices) const {
  Dataset d;
  d.dataset_id_ = dataset_id_;
  d.resize_ = resize_;
  d.mask_rule_ = mask_rule_;
  for (size_t i : indices) {
    if (i >= size()) throw std::out_of_range("dataset subset index out of range");
    d.ids_.push_back(ids_[i]);
    if (!records_.empty()) {
      d.records_.push_back(records_[i]);
    } else {
      d.refs_.push_back(refs_[i]);
    }
  }
  return d;
}

std::vector<SampleRef> index_sunseg(const DatasetSpec& spec) {
  const fs::path root(spec.root_dir);
  const auto manifest_path = root / "clips.json";
  if (!fs::exists(manifest_path)) {
    throw std::runtime_error("sunseg: clip manifest '" + manifest_path.string() + "' not found");
  }
  std::ifstream in(manifest_path);
  const auto manifest = nlohmann::json::parse(in);

  std::vector<std::string> groups;
  if (spec.split == Split::kTrain) {
    groups = {"train"};
  } else if (spec.subset.empty()) {
    groups = {"test-easy", "test-hard"};
  } else if (spec.subset == "easy" || spec.subset == "hard") {
    groups = {"test-" + spec.subset};
  } else {
    throw std::invalid_argument("sunseg: test subset must be 'easy' or 'hard', got '" +
                                spec.subset + "'");
  }

  std::vector<SampleRef> refs;
  for (const auto& group : groups) {
    if (!manifest.contains(group)) {
      throw std::runtime_error("sunseg: manifest has no '" + group + "' clip list");
    }
    for (const auto& clip_json : manifest.at(group)) {
      const std::string clip = clip_json.get<std::string>();
      auto frames = pair_directory(root / clip / "images", root / clip / "masks", clip + "/");
      for (size_t k = 0; k < frames.size(); ++k) {
        const auto number = trailing_number(fs::path(frames[k].image_path).stem().string());
        frames[k].frame_index = number ? *number : static_cast<int64_t>(k);
        refs.push_back(std::move(frames[k]));
      }
    }
  }
  return refs;
}

Dataset open_dataset(const DatasetSpec& spec) {
  if (spec.name == DatasetName::kSyntheticBlobs) {
    auto records = synthetic_blobs(spec.synthetic);
    if (spec.resize) {
      for (auto& r : records) {
        r = SampleRecord::make(resize_image(r.image, *spec.resize), resize_mask(r.mask, *spec.resize),
                               r.dataset_id, r.source_path, r.frame_index);
      }
    }
    return Dataset::from_records(to_string(spec.name), std::move(records));
  }

  const fs::path root(spec.root_dir);
  if (!fs::is_directory(root)) {
    throw std::runtime_error("dataset root '" + spec.root_dir + "' does not exist");
  }
  std::vector<SampleRef> refs;
  const std::string split = to_string(spec.split);
  if (fs::exists(root / "manifest.json")) {
    refs = from_manifest(root, root / "manifest.json", spec.split);
  } else if (spec.name == DatasetName::kSunseg) {
    refs = index_sunseg(spec);
  } else if (spec.name == DatasetName::kPolypCombined && spec.split == Split::kTest) {
    for (const auto& [part, n] : polyp_partitions()) {
      if (!spec.subset.empty() && spec.subset != part) continue;
      auto part_refs = pair_directory(root / "test" / part / "images", root / "test" / part / "masks",
                                      part + "/");
      refs.insert(refs.end(), part_refs.begin(), part_refs.end());
    }
  } else {
    refs = pair_directory(root / split / "images", root / split / "masks", "");
  }

  Dataset d = Dataset::from_refs(spec, std::move(refs));
  if (const auto expected = spec.expected_count();
      expected && static_cast<int64_t>(d.size()) != *expected) {
    std::string msg = to_string(spec.name) + "/" + split +
                      (spec.subset.empty() ? "" : "/" + spec.subset) + ": found " +
                      std::to_string(d.size()) + " samples, expected " + std::to_string(*expected);
    LOG(WARNING) << msg;
    d.warnings.push_back(std::move(msg));
  }
  return d;
}

std::vector<SampleRecord> load_dataset(const DatasetSpec& spec, std::vector<std::string>* warnings) {
  const auto d = open_dataset(spec);
  if (warnings) *warnings = d.warnings;
  std::vector<SampleRecord> out;
  out.reserve(d.size());
  for (size_t i = 0; i < d.size(); ++i) out.push_back(d.get(i));
  return out;
}

std::vector<SampleRecord> load_sunseg(const DatasetSpec& spec) {
  DatasetSpec s = spec;
  s.name = DatasetName::kSunseg;
  return load_dataset(s);
}

bool natural_less(const std::string& a, const std::string& b) {
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      // Compare by value: strip leading zeros, then length, then digits.
      size_t is = i, js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      if (ie - is != je - js) return ie - is < je - js;
      const int cmp = a.compare(is, ie - is, b, js, je - js);
      if (cmp != 0) return cmp < 0;
      if (ie - i != je - j) return ie - i < je - j;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

}  // namespace promptseg
