// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/core/parameter_snapshot.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <memory>
#include <stdexcept>

#include <torch/torch.h>

namespace promptseg {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: digest init failed");
    }
  }

  void update(const void* data, size_t n) {
    if (n > 0 && EVP_DigestUpdate(ctx_.get(), data, n) != 1) {
      throw std::runtime_error("sha256: digest update failed");
    }
  }

  void update_u64(uint64_t v) {
    std::array<unsigned char, 8> le{};
    for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(v >> (8 * i));
    update(le.data(), le.size());
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) {
      throw std::runtime_error("sha256: digest final failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string tensor_checksum(const torch::Tensor& t) {
  auto values = t.detach().to(torch::kCPU, torch::kFloat32).contiguous();
  Sha256 h;
  const float* data = values.data_ptr<float>();
  const auto n = static_cast<size_t>(values.numel());
  if constexpr (std::endian::native == std::endian::little) {
    h.update(data, n * sizeof(float));
  } else {
    std::vector<uint32_t> swapped(n);
    for (size_t i = 0; i < n; ++i) {
      swapped[i] = __builtin_bswap32(std::bit_cast<uint32_t>(data[i]));
    }
    h.update(swapped.data(), n * sizeof(uint32_t));
  }
  return h.hex();
}

ParameterSnapshot snapshot_parameters(const NamedTensors& params) {
  ParameterSnapshot snap;
  snap.entries.reserve(params.size());
  for (const auto& [name, tensor] : params) {
    snap.entries.push_back({name, tensor.sizes().vec(), tensor_checksum(tensor)});
  }
  std::sort(snap.entries.begin(), snap.entries.end(), [](const auto& a, const auto& b) {
    return a.name != b.name ? a.name < b.name : a.checksum < b.checksum;
  });
  Sha256 global;
  for (const auto& e : snap.entries) {
    global.update(e.name.data(), e.name.size());
    global.update("\0", 1);
    global.update_u64(e.shape.size());
    for (int64_t d : e.shape) global.update_u64(static_cast<uint64_t>(d));
    global.update(e.checksum.data(), e.checksum.size());
  }
  snap.global_checksum = global.hex();
  return snap;
}

ParameterSnapshot snapshot_parameters(const torch::nn::Module& module, SnapshotScope scope) {
  NamedTensors named;
  for (const auto& item : module.named_parameters(/*recurse=*/true)) {
    named.emplace_back(item.key(), item.value());
  }
  if (scope == SnapshotScope::kParametersAndBuffers) {
    for (const auto& item : module.named_buffers(/*recurse=*/true)) {
      named.emplace_back("buffer:" + item.key(), item.value());
    }
  }
  return snapshot_parameters(named);
}

nlohmann::json ParameterSnapshot::to_json() const {
  nlohmann::json entries_json = nlohmann::json::array();
  for (const auto& e : entries) {
    entries_json.push_back({{"name", e.name}, {"shape", e.shape}, {"checksum", e.checksum}});
  }
  return {{"global_checksum", global_checksum}, {"entries", std::move(entries_json)}};
}

ParameterSnapshot ParameterSnapshot::from_json(const nlohmann::json& j) {
  ParameterSnapshot snap;
  snap.global_checksum = j.at("global_checksum").get<std::string>();
  for (const auto& e : j.at("entries")) {
    snap.entries.push_back({e.at("name").get<std::string>(),
                            e.at("shape").get<std::vector<int64_t>>(),
                            e.at("checksum").get<std::string>()});
  }
  return snap;
}

}  // namespace promptseg
