#include "eegssl/metrics.hpp"

#include "eegssl/errors.hpp"
#include "json.hpp"

namespace eegssl {
namespace {
constexpr int kClasses = static_cast<int>(kNumStages);
}  // namespace

MetricsReport compute_metrics(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                        std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) fail(ErrorCode::EmptyInput, "no predictions to score");
  MetricsReport r;
  r.n_test = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int t = labels[i];
    const int p = predictions[i];
    if (t < 0 || t >= kClasses || p < 0 || p >= kClasses) {
      fail(ErrorCode::IndexOutOfRange, "class index outside 0..4 at position " + std::to_string(i));
    }
    ++r.confusion[t][p];
  }
  std::size_t correct = 0;
  for (int c = 0; c < kClasses; ++c) {
    const double tp = static_cast<double>(r.confusion[c][c]);
    double predicted = 0.0;
    double actual = 0.0;
    for (int o = 0; o < kClasses; ++o) {
      predicted += static_cast<double>(r.confusion[o][c]);
      actual += static_cast<double>(r.confusion[c][o]);
    }
    const double precision = predicted > 0.0 ? tp / predicted : 0.0;
    const double recall = actual > 0.0 ? tp / actual : 0.0;
    r.per_class_f1[c] = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    r.macro_f1 += r.per_class_f1[c];
    correct += r.confusion[c][c];
  }
  r.macro_f1 /= kClasses;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n_test);
  return r;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["macro_f1"] = macro_f1;
  nlohmann::ordered_json f1;
  for (auto stage : kAllStages) f1[std::string(stage_name(stage))] = per_class_f1[stage_index(stage)];
  j["per_class_f1"] = f1;
  auto& flat = j["confusion"] = nlohmann::json::array();
  for (const auto& row : confusion) {
    for (auto v : row) flat.push_back(v);
  }
  j["n_test"] = n_test;
  return j.dump(2) + "\n";
}

}  // namespace eegssl
