#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "eegssl/synth.hpp"
#include "eegssl/training.hpp"
#include "json.hpp"

using namespace eegssl;

namespace {

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.ssl_batch = 8;
  cfg.cls_batch = 8;
  cfg.ssl_epochs = 1;
  cfg.cls_epochs = 2;
  cfg.warmup_epochs = 0;
  cfg.seed = 5;
  return cfg;
}

// Independent per-class F1 from raw counts.
double scalar_f1(const std::vector<int>& p, const std::vector<int>& y, int c) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    tp += (p[i] == c && y[i] == c);
    fp += (p[i] == c && y[i] != c);
    fn += (p[i] != c && y[i] == c);
  }
  if (tp == 0) return 0.0;
  const double prec = tp / (tp + fp), rec = tp / (tp + fn);
  return 2 * prec * rec / (prec + rec);
}

}  // namespace

TEST_SUITE("training_eval") {

TEST_CASE("metrics worked cases") {
  std::vector<int> y;
  for (int c = 0; c < 5; ++c) y.insert(y.end(), 4, c);
  const auto perfect = compute_metrics(y, y);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro_f1 == 1.0);
  for (int c = 0; c < 5; ++c) CHECK(perfect.confusion[c][c] == 4);

  const std::vector<int> all_w(y.size(), 0);
  const auto w = compute_metrics(all_w, y);
  CHECK(std::abs(w.accuracy - 0.2) < 1e-12);
  CHECK(std::abs(w.per_class_f1[0] - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(w.macro_f1 - 1.0 / 15.0) < 1e-12);
  CHECK(w.n_test == 20);

  const auto missing = compute_metrics(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 0});
  CHECK(missing.per_class_f1[4] == 0.0);

  CHECK_THROWS_AS(compute_metrics(std::vector<int>{0}, std::vector<int>{0, 1}), Error);
  CHECK_THROWS_AS(compute_metrics(std::vector<int>{}, std::vector<int>{}), Error);
  CHECK_THROWS_AS(compute_metrics(std::vector<int>{7}, std::vector<int>{0}), Error);

  const auto j = nlohmann::json::parse(w.to_json());
  CHECK(j["accuracy"].get<double>() == doctest::Approx(0.2));
  CHECK(j["per_class_f1"].size() == 5);
  CHECK(j["per_class_f1"].contains("REM"));
  CHECK(j["confusion"].size() == 25);
  CHECK(j["n_test"] == 20);
}

TEST_CASE("metrics match a scalar implementation and respect relabeling") {
  RngStream rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(1, 60);
    std::vector<int> p(n), y(n);
    for (int i = 0; i < n; ++i) {
      p[i] = rng.uniform_int(0, 4);
      y[i] = rng.uniform_int(0, 4);
    }
    const auto m = compute_metrics(p, y);
    double macro = 0.0, correct = 0.0, trace = 0.0, total = 0.0;
    for (int c = 0; c < 5; ++c) {
      const double f = scalar_f1(p, y, c);
      CHECK(std::abs(m.per_class_f1[c] - f) < 1e-10);
      macro += f / 5;
      trace += m.confusion[c][c];
      for (int d = 0; d < 5; ++d) total += m.confusion[c][d];
    }
    for (int i = 0; i < n; ++i) correct += p[i] == y[i];
    CHECK(std::abs(m.macro_f1 - macro) < 1e-10);
    CHECK(std::abs(m.accuracy - correct / n) < 1e-10);
    CHECK(trace / total == doctest::Approx(m.accuracy));
    CHECK(total == n);

    std::vector<int> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    std::vector<int> pp(n), yy(n);
    for (int i = 0; i < n; ++i) {
      pp[i] = perm[p[i]];
      yy[i] = perm[y[i]];
    }
    CHECK(std::abs(compute_metrics(pp, yy).macro_f1 - m.macro_f1) < 1e-12);
  }
}

TEST_CASE("splits") {
  const auto data = synthesize({5, 10, 1, 1.0});
  const auto split = split_dataset(data, {SplitBy::Record, 0.2});
  CHECK(split.test.size() == 10);
  CHECK(split.train.size() == 40);
  std::set<std::size_t> all(split.train.begin(), split.train.end());
  for (auto i : split.test) CHECK(all.insert(i).second);
  std::array<int, 5> test_hist{};
  for (auto i : split.test) test_hist[stage_index(*data[i].label)]++;
  for (int c : test_hist) CHECK(c == 2);
  CHECK(split.test_keys.size() == 2);
  CHECK(exclude_keys(data, SplitBy::Record, split.test_keys) == split.train);

  Epoch e{std::vector<float>(kEpochLength), StageLabel::W, "SC4012E0-PSG:EEG Fpz-Cz:3"};
  CHECK(split_key(e, SplitBy::Subject) == "SC401");
  CHECK(split_key(e, SplitBy::Record) == "SC4012E0-PSG");
  e.source_id = "night7:EEG:0";
  CHECK(split_key(e, SplitBy::Subject) == "night7");
}

TEST_CASE("per-class draws") {
  const auto data = synthesize({5, 20, 2, 1.0});
  const auto split = split_dataset(data, {SplitBy::Record, 0.2});
  const auto a = draw_per_class(data, split.train, 3, 7, 0);
  CHECK(a.size() == 15);
  CHECK(a == draw_per_class(data, split.train, 3, 7, 0));
  CHECK(a != draw_per_class(data, split.train, 3, 7, 1));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == a.size());
  std::array<int, 5> hist{};
  for (auto i : a) hist[stage_index(*data[i].label)]++;
  for (int c : hist) CHECK(c == 3);
  auto every = draw_per_class(data, split.train, 16, 7, 3);
  CHECK(every == split.train);
  try {
    draw_per_class(data, split.train, 17, 7, 0);
    FAIL("expected InsufficientClassSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientClassSamples);
  }
}

TEST_CASE("pretraining is deterministic") {
  const auto data = synthesize({4, 1, 3, 1.0});
  auto cfg = quick_config();
  cfg.ssl_batch = 4;
  const auto model = ModelConfig::tiny();
  std::vector<std::string> lines;
  const auto a = pretrain(cfg, data, model, nullptr, [&](const std::string& l) { lines.push_back(l); });
  const auto b = pretrain(cfg, data, model);
  CHECK(a.epoch_losses == b.epoch_losses);
  CHECK(a.params == b.params);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].starts_with("epoch=1 phase=ssl loss="));
  CHECK(lines[0].find(" lr=") != std::string::npos);
  CHECK(std::isfinite(a.epoch_losses[0]));
}

TEST_CASE("loss at initialization is near the uncorrelated baseline") {
  const auto data = synthesize({5, 52, 4, 1.0});
  const auto model = ModelConfig::tiny();
  auto params = init_parameters<float>(model, 1);
  const std::size_t n = 256;
  Tensor<float> views({2 * n, 1, kEpochLength});
  const auto crop = TransformSpec::defaults(TransformKind::CropResize);
  const auto perm = TransformSpec::defaults(TransformKind::Permutation);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = make_view_pair(data[i], crop, perm, RngStream(9, {i}));
    std::copy(a.begin(), a.end(), views.data() + i * kEpochLength);
    std::copy(b.begin(), b.end(), views.data() + (n + i) * kEpochLength);
  }
  Graph<float> g;
  RngStream drop(2);
  const auto emb = forward_backbone(g, params, model, g.constant(std::move(views)), Mode::Train, &drop);
  const auto& e = g.value(emb);
  const auto loss = batch_loss(EmbeddingBatch(2 * n, e.dim(1), std::vector<double>(e.data(), e.data() + e.size())));
  const double baseline = std::log(2.0 * n - 1.0);
  CHECK(std::abs(baseline - 6.236) < 1e-3);
  CHECK(std::abs(loss.loss - baseline) < 0.15 * baseline);
}

TEST_CASE("linear evaluation leaves the backbone untouched") {
  const auto data = synthesize({5, 6, 5, 1.0});
  const auto split = split_dataset(data, {SplitBy::Record, 0.34});
  const auto model = ModelConfig::tiny();
  const auto params = init_parameters<float>(model, 2);
  const auto r = linear_eval(params, model, data, split, quick_config());
  for (const auto& [name, t] : params.tensors()) {
    if (Parameters<float>::is_backbone(name)) CHECK(r.params.at(name) == t);
  }
  CHECK(r.params.at("classifier.out.weight") != params.at("classifier.out.weight"));
  CHECK(r.metrics.n_test == split.test.size());
  CHECK(r.epoch_losses.size() == 2);
}

TEST_CASE("fine-tuning from the random init is supervised training, reproducibly") {
  const auto data = synthesize({5, 6, 6, 1.0});
  const auto split = split_dataset(data, {SplitBy::Record, 0.34});
  const auto model = ModelConfig::tiny();
  const auto cfg = quick_config();
  const auto init = init_parameters<float>(model, cfg.seed);
  const auto a = finetune(init, model, data, split, cfg);
  const auto b = finetune(init_parameters<float>(model, cfg.seed), model, data, split, cfg);
  CHECK(a.epoch_losses == b.epoch_losses);
  CHECK(a.params == b.params);
  CHECK(a.metrics.to_json() == b.metrics.to_json());
  bool backbone_moved = false;
  for (const auto& [name, t] : init.tensors()) {
    if (Parameters<float>::is_backbone(name) && Parameters<float>::is_trainable(name)) {
      backbone_moved |= !(a.params.at(name) == t);
    }
  }
  CHECK(backbone_moved);
}

TEST_CASE("limited-sample experiment with every sample drawn equals fine-tuning") {
  const auto data = synthesize({5, 5, 7, 1.0});
  const auto split = split_dataset(data, {SplitBy::Record, 0.4});
  const auto model = ModelConfig::tiny();
  const auto cfg = quick_config();
  const auto pretrained = init_parameters<float>(model, 99);
  const auto r = limited_sample_experiment(pretrained, model, data, split, 3, 1, cfg);
  CHECK(r.k_per_class == 3);
  REQUIRE(r.random_init.accuracy.size() == 1);
  CHECK(r.random_init.accuracy_std == 0.0);

  const auto direct = finetune(init_parameters<float>(model, cfg.seed), model, data, split, cfg);
  CHECK(r.random_init.accuracy[0] == direct.metrics.accuracy);
  CHECK(r.random_init.macro_f1[0] == direct.metrics.macro_f1);
  auto ssl = init_parameters<float>(model, cfg.seed);
  for (auto& [name, t] : ssl.tensors()) {
    if (Parameters<float>::is_backbone(name)) t = pretrained.at(name);
  }
  CHECK(r.ssl.accuracy[0] == finetune(ssl, model, data, split, cfg).metrics.accuracy);

  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["ssl"].contains("accuracy_mean"));
  CHECK(j["random_init"]["accuracy"].size() == 1);
}

TEST_CASE("embedding export") {
  const auto data = synthesize({3, 1, 8, 1.0});
  const auto model = ModelConfig::tiny();
  const auto params = init_parameters<float>(model, 4);
  const auto tsv = embeddings_tsv(params, model, data);
  CHECK(tsv == embeddings_tsv(params, model, data));
  std::istringstream in(tsv);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, '\t');) cols.push_back(c);
    rows.push_back(cols);
  }
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "source_id");
  CHECK(rows[0][2] == "e0");
  CHECK(rows[0].back() == "e15");
  for (std::size_t r = 1; r < 4; ++r) {
    REQUIRE(rows[r].size() == 18);
    CHECK(rows[r][0] == data[r - 1].source_id);
    CHECK(rows[r][1] == stage_name(*data[r - 1].label));
    auto local = params;
    Graph<float> g;
    Tensor<float> x({1, 1, kEpochLength}, std::vector<float>(data[r - 1].samples));
    const auto emb = forward_backbone(g, local, model, g.constant(x), Mode::Eval, nullptr);
    for (std::size_t d = 0; d < 16; ++d) CHECK(std::abs(std::stod(rows[r][2 + d]) - g.value(emb)[d]) < 1e-6);
  }
}

}  // TEST_SUITE
