// Copyright (c) 2026, The promptseg Authors
// SPDX-License-Identifier: Apache-2.0

#include "promptseg/metrics/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <mutex>
#include <thread>

namespace promptseg {

namespace {

constexpr const char* kColumns[] = {"dice", "iou", "sen", "f_beta", "f_beta_w", "s_alpha",
                                    "e_phi_mn"};

std::vector<double> values_of(const SampleMetrics& m) {
  return {m.dice, m.iou, m.sen, m.f_beta, m.f_beta_w, m.s_alpha, m.e_phi_mn};
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10f", v);
  return buf;
}

nlohmann::json row_json(const SampleMetrics& m) {
  nlohmann::json j{{"sample_id", m.sample_id}};
  const auto v = values_of(m);
  for (size_t i = 0; i < v.size(); ++i) j[kColumns[i]] = v[i];
  return j;
}

SampleMetrics row_from_json(const nlohmann::json& j) {
  SampleMetrics m;
  m.sample_id = j.at("sample_id").get<std::string>();
  double* fields[] = {&m.dice, &m.iou, &m.sen, &m.f_beta, &m.f_beta_w, &m.s_alpha, &m.e_phi_mn};
  for (size_t i = 0; i < std::size(kColumns); ++i) *fields[i] = j.at(kColumns[i]).get<double>();
  return m;
}

}  // namespace

MetricConfig MetricConfig::from_json(const nlohmann::json& j) {
  MetricConfig c;
  c.beta_sq_f = j.value("beta_sq_f", c.beta_sq_f);
  c.beta_sq_fw = j.value("beta_sq_fw", c.beta_sq_fw);
  c.alpha = j.value("alpha", c.alpha);
  c.threshold = j.value("threshold", c.threshold);
  return c;
}

nlohmann::json MetricConfig::to_json() const {
  return {{"beta_sq_f", beta_sq_f},
          {"beta_sq_fw", beta_sq_fw},
          {"alpha", alpha},
          {"threshold", threshold}};
}

void MetricReport::write_csv(std::ostream& os) const {
  os << "sample_id";
  for (const char* c : kColumns) os << ',' << c;
  os << '\n';
  auto row = [&os](const SampleMetrics& m) {
    os << m.sample_id;
    for (double v : values_of(m)) os << ',' << format_value(v);
    os << '\n';
  };
  for (const auto& m : per_sample) row(m);
  row(aggregate);
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& m : per_sample) samples.push_back(row_json(m));
  return {{"config", config.to_json()}, {"per_sample", samples}, {"aggregate", row_json(aggregate)}};
}

void MetricReport::save(const std::filesystem::path& stem) const {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  auto csv_path = stem;
  csv_path += ".csv";
  auto json_path = stem;
  json_path += ".json";
  std::ofstream csv(csv_path);
  std::ofstream json(json_path);
  if (!csv || !json) throw std::runtime_error("cannot write report '" + stem.string() + "'");
  write_csv(csv);
  json << to_json().dump(2) << '\n';
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport r;
  if (j.contains("config")) r.config = MetricConfig::from_json(j.at("config"));
  for (const auto& row : j.at("per_sample")) r.per_sample.push_back(row_from_json(row));
  r.aggregate = row_from_json(j.at("aggregate"));
  return r;
}

MetricReport MetricReport::load(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open report '" + json_path.string() + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("report '" + json_path.string() + "': " + e.what());
  }
}

void write_summary_csv(std::ostream& os,
                       const std::vector<std::pair<std::string, MetricReport>>& reports) {
  os << "name,samples";
  for (const char* c : kColumns) os << ',' << c;
  os << '\n';
  for (const auto& [name, report] : reports) {
    os << name << ',' << report.per_sample.size();
    for (double v : values_of(report.aggregate)) os << ',' << format_value(v);
    os << '\n';
  }
}

SampleMetrics evaluate_sample(const EvalItem& item, const MetricConfig& config) {
  require_same_dims(item.prediction, item.ground_truth, "evaluate_sample");
  const auto bin = threshold_map(item.prediction, config.threshold);
  SampleMetrics m;
  m.sample_id = item.sample_id;
  m.dice = dice_score(bin, item.ground_truth);
  m.iou = iou_score(bin, item.ground_truth);
  m.sen = sensitivity(bin, item.ground_truth);
  m.f_beta = f_beta(bin, item.ground_truth, config.beta_sq_f);
  m.f_beta_w = weighted_f_beta(item.prediction, item.ground_truth, config.beta_sq_fw);
  m.s_alpha = s_measure(item.prediction, item.ground_truth, config.alpha);
  m.e_phi_mn = e_measure(item.prediction, item.ground_truth);
  return m;
}

MetricReport evaluate_dataset(const std::vector<EvalItem>& items, const MetricConfig& config,
                              unsigned threads) {
  MetricReport report;
  report.config = config;
  report.per_sample.resize(items.size());

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<size_t>(items.size(), 1));
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (size_t i = next++; i < items.size(); i = next++) {
      try {
        report.per_sample[i] = evaluate_sample(items[i], config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::stable_sort(report.per_sample.begin(), report.per_sample.end(),
                   [](const SampleMetrics& a, const SampleMetrics& b) {
                     return a.sample_id < b.sample_id;
                   });
  report.aggregate.sample_id = "mean";
  if (!report.per_sample.empty()) {
    const double n = static_cast<double>(report.per_sample.size());
    for (const auto& m : report.per_sample) {
      report.aggregate.dice += m.dice;
      report.aggregate.iou += m.iou;
      report.aggregate.sen += m.sen;
      report.aggregate.f_beta += m.f_beta;
      report.aggregate.f_beta_w += m.f_beta_w;
      report.aggregate.s_alpha += m.s_alpha;
      report.aggregate.e_phi_mn += m.e_phi_mn;
    }
    report.aggregate.dice /= n;
    report.aggregate.iou /= n;
    report.aggregate.sen /= n;
    report.aggregate.f_beta /= n;
    report.aggregate.f_beta_w /= n;
    report.aggregate.s_alpha /= n;
    report.aggregate.e_phi_mn /= n;
  }
  return report;
}

}  // namespace promptseg
