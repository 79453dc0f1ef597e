#include "eegssl/training.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "eegssl/binary_io.hpp"
#include "eegssl/optim.hpp"
#include "json.hpp"

namespace eegssl {
namespace {

enum Tag : std::uint64_t {
  kShuffleSsl = 1,
  kViews = 2,
  kDropoutSsl = 3,
  kShuffleCls = 4,
  kDropoutCls = 5,
  kDraw = 6,
};

constexpr std::size_t kEvalChunk = 128;

void shuffle_indices(std::vector<std::size_t>& v, RngStream rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i - 1)));
    std::swap(v[i - 1], v[j]);
  }
}

int label_of(const Epoch& e) {
  if (!e.label) fail(ErrorCode::InsufficientClassSamples, "epoch '" + e.source_id + "' has no stage label");
  return stage_index(*e.label);
}

double step_lr(const TrainConfig& cfg, int epoch, std::size_t step, std::size_t steps, int total, double base) {
  const double e = epoch + (static_cast<double>(step) + 0.5) / static_cast<double>(steps);
  return lr_schedule(e, total, base, std::min(cfg.warmup_epochs, static_cast<double>(total)));
}

Tensor<float> pack_rows(const EpochDataset& data, const std::vector<std::size_t>& indices, std::size_t begin,
                        std::size_t end) {
  Tensor<float> out({end - begin, 1, kEpochLength});
  for (std::size_t i = begin; i < end; ++i) {
    const auto& s = data[indices[i]].samples;
    std::copy(s.begin(), s.end(), out.data() + (i - begin) * kEpochLength);
  }
  return out;
}

[[noreturn]] void rethrow_at(const Error& e, const std::string& where) {
  throw Error(e.code(), where + ": " + e.message());
}

std::vector<double> train_classifier(Parameters<float>& params, const ModelConfig& model,
                                     const EpochDataset& data, const std::vector<std::size_t>& train,
                                     const TrainConfig& cfg, bool frozen, const LogFn& log) {
  if (train.empty()) fail(ErrorCode::EmptyDataset, "no labeled training epochs");
  std::vector<int> labels(data.size(), -1);
  for (auto i : train) labels[i] = label_of(data[i]);

  const auto dim = static_cast<std::size_t>(model.embedding_dim);
  std::vector<float> features;
  std::vector<std::size_t> row_of(frozen ? data.size() : 0);
  if (frozen) {
    features = embed(params, model, data, train);
    for (std::size_t r = 0; r < train.size(); ++r) row_of[train[r]] = r;
  }

  SgdMomentum<float> opt({cfg.momentum, cfg.l2});
  const std::size_t steps = (train.size() + cfg.cls_batch - 1) / cfg.cls_batch;
  std::vector<double> losses;
  for (int epoch = 0; epoch < cfg.cls_epochs; ++epoch) {
    auto order = train;
    shuffle_indices(order, RngStream(cfg.seed, {kShuffleCls, static_cast<std::uint64_t>(epoch)}));
    double total = 0.0;
    double lr_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const auto begin = s * cfg.cls_batch;
      const auto end = std::min(begin + cfg.cls_batch, order.size());
      std::vector<int> batch_labels;
      for (auto i = begin; i < end; ++i) batch_labels.push_back(labels[order[i]]);
      try {
        Graph<float> g;
        NodeId emb;
        if (frozen) {
          Tensor<float> x({end - begin, dim});
          for (auto i = begin; i < end; ++i) {
            std::copy_n(features.data() + row_of[order[i]] * dim, dim, x.data() + (i - begin) * dim);
          }
          emb = g.constant(std::move(x));
        } else {
          RngStream drop(cfg.seed, {kDropoutCls, static_cast<std::uint64_t>(epoch), s});
          emb = forward_backbone(g, params, model, g.constant(pack_rows(data, order, begin, end)), Mode::Train,
                                 &drop);
        }
        const auto logits = forward_classifier(g, params, model, emb);
        const auto ce = softmax_cross_entropy(g, logits, std::span<const int>(batch_labels));
        const double loss = g.value(ce.loss)[0];
        if (!std::isfinite(loss)) fail(ErrorCode::NonFinite, "classification loss is not finite");
        g.backward(ce.loss);
        auto grads = g.parameter_gradients();
        if (frozen) {
          std::erase_if(grads, [](const auto& kv) { return Parameters<float>::is_backbone(kv.first); });
        }
        const double lr = step_lr(cfg, epoch, s, steps, cfg.cls_epochs, cfg.cls_lr);
        opt.step(params, grads, lr);
        total += loss * static_cast<double>(end - begin);
        lr_sum += lr;
      } catch (const Error& e) {
        rethrow_at(e, "cls epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(s));
      }
    }
    losses.push_back(total / static_cast<double>(order.size()));
    if (log) log(format_log_line(epoch + 1, "cls", losses.back(), lr_sum / static_cast<double>(steps)));
  }
  return losses;
}

ArmStats summarize(std::vector<double> accuracy, std::vector<double> macro_f1) {
  const auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  ArmStats a;
  a.accuracy = std::move(accuracy);
  a.macro_f1 = std::move(macro_f1);
  stats(a.accuracy, a.accuracy_mean, a.accuracy_std);
  stats(a.macro_f1, a.macro_f1_mean, a.macro_f1_std);
  return a;
}

nlohmann::ordered_json arm_json(const ArmStats& a) {
  nlohmann::ordered_json j;
  j["accuracy_mean"] = a.accuracy_mean;
  j["accuracy_std"] = a.accuracy_std;
  j["macro_f1_mean"] = a.macro_f1_mean;
  j["macro_f1_std"] = a.macro_f1_std;
  j["accuracy"] = a.accuracy;
  j["macro_f1"] = a.macro_f1;
  return j;
}

}  // namespace

void TrainConfig::validate() const {
  const auto bad = [](const std::string& why) { fail(ErrorCode::InvalidSpec, "train: " + why); };
  if (!(temperature > 0.0)) bad("temperature must be > 0");
  if (ssl_batch < 4) bad("ssl_batch must be >= 4 (two originals)");
  if (cls_batch < 1) bad("cls_batch must be >= 1");
  if (ssl_epochs < 1 || cls_epochs < 1) bad("epochs must be >= 1");
  if (!(ssl_lr >= 0.0) || !(cls_lr >= 0.0)) bad("learning rates must be >= 0");
  if (!(warmup_epochs >= 0.0)) bad("warmup_epochs must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) bad("momentum must be in [0, 1)");
  if (!(l2 >= 0.0)) bad("l2 must be >= 0");
  t1.validate();
  t2.validate();
}

std::string_view to_string(SplitBy by) { return by == SplitBy::Subject ? "subject" : "record"; }

SplitBy split_by_from_string(std::string_view name) {
  if (name == "subject") return SplitBy::Subject;
  if (name == "record") return SplitBy::Record;
  fail(ErrorCode::ConfigError, "unknown split mode '" + std::string(name) + "'");
}

std::string split_key(const Epoch& epoch, SplitBy by) {
  std::string record = epoch.source_id.substr(0, epoch.source_id.find(':'));
  if (by == SplitBy::Subject && record.size() >= 5 && (record.starts_with("SC4") || record.starts_with("ST7")) &&
      std::isdigit(static_cast<unsigned char>(record[3])) && std::isdigit(static_cast<unsigned char>(record[4]))) {
    return record.substr(0, 5);
  }
  return record;
}

DataSplit split_dataset(const EpochDataset& dataset, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    fail(ErrorCode::InvalidSpec, "split test_fraction must be in (0, 1)");
  }
  std::set<std::string> keys;
  for (const auto& e : dataset.epochs()) {
    if (e.label) keys.insert(split_key(e, spec.by));
  }
  if (keys.size() < 2) fail(ErrorCode::EmptyDataset, "need labeled epochs from at least two split groups");
  auto held = static_cast<std::size_t>(std::ceil(spec.test_fraction * static_cast<double>(keys.size()) - 1e-9));
  held = std::clamp<std::size_t>(held, 1, keys.size() - 1);
  DataSplit split;
  split.test_keys.assign(std::prev(keys.end(), static_cast<std::ptrdiff_t>(held)), keys.end());
  const std::set<std::string> test(split.test_keys.begin(), split.test_keys.end());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& e = dataset[i];
    if (!e.label) continue;
    (test.count(split_key(e, spec.by)) ? split.test : split.train).push_back(i);
  }
  return split;
}

std::vector<std::size_t> exclude_keys(const EpochDataset& dataset, SplitBy by,
                                      const std::vector<std::string>& excluded_keys) {
  const std::set<std::string> excluded(excluded_keys.begin(), excluded_keys.end());
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!excluded.count(split_key(dataset[i], by))) keep.push_back(i);
  }
  return keep;
}

PretrainResult pretrain(const TrainConfig& cfg, const EpochDataset& unlabeled, const ModelConfig& model,
                        const Parameters<float>* initial, const LogFn& log) {
  cfg.validate();
  model.validate();
  if (unlabeled.size() < 2) fail(ErrorCode::EmptyDataset, "pretraining needs at least two epochs");
  PretrainResult result{initial ? *initial : init_parameters<float>(model, cfg.seed), {}};
  auto& params = result.params;
  SgdMomentum<float> opt({cfg.momentum, cfg.l2});

  const std::size_t originals = cfg.ssl_batch / 2;
  std::vector<std::pair<std::size_t, std::size_t>> batches;
  for (std::size_t b = 0; b < unlabeled.size(); b += originals) {
    const auto e = std::min(b + originals, unlabeled.size());
    if (e - b >= 2) batches.emplace_back(b, e);
  }
  const std::size_t steps = batches.size();

  for (int epoch = 0; epoch < cfg.ssl_epochs; ++epoch) {
    const auto ue = static_cast<std::uint64_t>(epoch);
    std::vector<std::size_t> order(unlabeled.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_indices(order, RngStream(cfg.seed, {kShuffleSsl, ue}));
    double total = 0.0;
    double lr_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t s = 0; s < steps; ++s) {
      const auto [begin, end] = batches[s];
      const std::size_t n = end - begin;
      Tensor<float> views({2 * n, 1, kEpochLength});
#pragma omp parallel for schedule(static)
      for (std::size_t i = 0; i < n; ++i) {
        const auto idx = order[begin + i];
        const auto [a, b] = make_view_pair(unlabeled[idx], cfg.t1, cfg.t2, RngStream(cfg.seed, {kViews, ue, idx}));
        std::copy(a.begin(), a.end(), views.data() + i * kEpochLength);
        std::copy(b.begin(), b.end(), views.data() + (n + i) * kEpochLength);
      }
      try {
        Graph<float> g;
        RngStream drop(cfg.seed, {kDropoutSsl, ue, s});
        const auto emb = forward_backbone(g, params, model, g.constant(std::move(views)), Mode::Train, &drop);
        const auto loss = contrastive_loss(g, emb, cfg.temperature, cfg.loss_mode);
        g.backward(loss);
        const double lr = step_lr(cfg, epoch, s, steps, cfg.ssl_epochs, cfg.ssl_lr);
        opt.step(params, g.parameter_gradients(), lr);
        total += g.value(loss)[0] * static_cast<double>(n);
        counted += n;
        lr_sum += lr;
      } catch (const Error& e) {
        rethrow_at(e, "ssl epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(s));
      }
    }
    result.epoch_losses.push_back(total / static_cast<double>(counted));
    if (log) log(format_log_line(epoch + 1, "ssl", result.epoch_losses.back(), lr_sum / static_cast<double>(steps)));
  }
  return result;
}

std::vector<float> embed(const Parameters<float>& params, const ModelConfig& model, const EpochDataset& dataset,
                         const std::vector<std::size_t>& indices) {
  const auto dim = static_cast<std::size_t>(model.embedding_dim);
  std::vector<float> out(indices.size() * dim);
  auto local = params;  // eval mode never writes, but the forward takes a mutable store
  for (std::size_t b = 0; b < indices.size(); b += kEvalChunk) {
    const auto e = std::min(b + kEvalChunk, indices.size());
    Graph<float> g;
    const auto emb = forward_backbone(g, local, model, g.constant(pack_rows(dataset, indices, b, e)), Mode::Eval,
                                      nullptr);
    const auto& v = g.value(emb);
    if (!v.all_finite()) fail(ErrorCode::NonFinite, "non-finite embedding");
    std::copy(v.data(), v.data() + v.size(), out.data() + b * dim);
  }
  return out;
}

std::vector<int> predict(const Parameters<float>& params, const ModelConfig& model, const EpochDataset& dataset,
                         const std::vector<std::size_t>& indices) {
  const auto dim = static_cast<std::size_t>(model.embedding_dim);
  const auto features = embed(params, model, dataset, indices);
  auto local = params;
  Graph<float> g;
  const auto logits =
      forward_classifier(g, local, model, g.constant(Tensor<float>({indices.size(), dim}, features)));
  const auto& v = g.value(logits);
  const auto classes = v.dim(1);
  std::vector<int> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const float* row = v.data() + i * classes;
    out[i] = static_cast<int>(std::max_element(row, row + classes) - row);
  }
  return out;
}

namespace {

ClassificationResult classify(const Parameters<float>& initial, const ModelConfig& model,
                              const EpochDataset& labeled, const DataSplit& split, const TrainConfig& cfg,
                              bool frozen, const LogFn& log) {
  cfg.validate();
  model.validate();
  auto layout = init_parameters<float>(model, 0);
  load_into(layout, initial);
  if (split.test.empty()) fail(ErrorCode::EmptyDataset, "empty test split");
  ClassificationResult r;
  r.params = std::move(layout);
  r.epoch_losses = train_classifier(r.params, model, labeled, split.train, cfg, frozen, log);
  std::vector<int> labels;
  for (auto i : split.test) labels.push_back(label_of(labeled[i]));
  const auto predictions = predict(r.params, model, labeled, split.test);
  r.metrics = compute_metrics(predictions, labels);
  return r;
}

}  // namespace

ClassificationResult linear_eval(const Parameters<float>& params, const ModelConfig& model,
                                 const EpochDataset& labeled, const DataSplit& split, const TrainConfig& cfg,
                                 const LogFn& log) {
  return classify(params, model, labeled, split, cfg, true, log);
}

ClassificationResult finetune(const Parameters<float>& params, const ModelConfig& model,
                              const EpochDataset& labeled, const DataSplit& split, const TrainConfig& cfg,
                              const LogFn& log) {
  return classify(params, model, labeled, split, cfg, false, log);
}

std::vector<std::size_t> draw_per_class(const EpochDataset& dataset, const std::vector<std::size_t>& pool,
                                        std::size_t k, std::uint64_t seed, int repetition) {
  if (k == 0) fail(ErrorCode::InvalidSpec, "k_per_class must be >= 1");
  std::vector<std::size_t> drawn;
  for (int c = 0; c < static_cast<int>(kNumStages); ++c) {
    std::vector<std::size_t> members;
    for (auto i : pool) {
      if (label_of(dataset[i]) == c) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < k) {
      fail(ErrorCode::InsufficientClassSamples,
           std::string(stage_name(*stage_from_index(c))) + " has " + std::to_string(members.size()) +
               " training epochs, k_per_class is " + std::to_string(k));
    }
    shuffle_indices(members, RngStream(seed, {kDraw, static_cast<std::uint64_t>(repetition),
                                              static_cast<std::uint64_t>(c)}));
    drawn.insert(drawn.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::sort(drawn.begin(), drawn.end());
  return drawn;
}

LimitedResult limited_sample_experiment(const Parameters<float>& pretrained, const ModelConfig& model,
                                        const EpochDataset& labeled, const DataSplit& split, std::size_t k,
                                        int repetitions, const TrainConfig& cfg, const LogFn& log) {
  if (repetitions < 1) fail(ErrorCode::InvalidSpec, "repetitions must be >= 1");
  std::vector<double> rand_acc, rand_f1, ssl_acc, ssl_f1;
  for (int r = 0; r < repetitions; ++r) {
    auto rc = cfg;
    rc.seed = cfg.seed + static_cast<std::uint64_t>(r);
    DataSplit sub = split;
    sub.train = draw_per_class(labeled, split.train, k, cfg.seed, r);

    const auto random_init = init_parameters<float>(model, rc.seed);
    auto ssl_init = random_init;
    for (auto& [name, t] : ssl_init.tensors()) {
      if (Parameters<float>::is_backbone(name)) t = pretrained.at(name);
    }
    const auto a = finetune(random_init, model, labeled, sub, rc);
    const auto b = finetune(ssl_init, model, labeled, sub, rc);
    rand_acc.push_back(a.metrics.accuracy);
    rand_f1.push_back(a.metrics.macro_f1);
    ssl_acc.push_back(b.metrics.accuracy);
    ssl_f1.push_back(b.metrics.macro_f1);
    if (log) {
      char line[160];
      std::snprintf(line, sizeof(line), "limited k=%zu rep=%d random_acc=%.6f ssl_acc=%.6f", k, r,
                    a.metrics.accuracy, b.metrics.accuracy);
      log(line);
    }
  }
  LimitedResult out;
  out.k_per_class = k;
  out.repetitions = repetitions;
  out.random_init = summarize(std::move(rand_acc), std::move(rand_f1));
  out.ssl = summarize(std::move(ssl_acc), std::move(ssl_f1));
  return out;
}

std::string LimitedResult::to_json() const {
  nlohmann::ordered_json j;
  j["k_per_class"] = k_per_class;
  j["repetitions"] = repetitions;
  j["random_init"] = arm_json(random_init);
  j["ssl"] = arm_json(ssl);
  return j.dump(2) + "\n";
}

std::string embeddings_tsv(const Parameters<float>& params, const ModelConfig& model, const EpochDataset& dataset) {
  const auto dim = static_cast<std::size_t>(model.embedding_dim);
  std::vector<std::size_t> all(dataset.size());
  std::iota(all.begin(), all.end(), 0);
  const auto values = embed(params, model, dataset, all);
  std::string out = "source_id\tlabel";
  for (std::size_t d = 0; d < dim; ++d) out += "\te" + std::to_string(d);
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& e = dataset[i];
    out += e.source_id;
    out += '\t';
    out += e.label ? std::string(stage_name(*e.label)) : std::string("-");
    for (std::size_t d = 0; d < dim; ++d) {
      std::snprintf(buf, sizeof(buf), "\t%.9g", static_cast<double>(values[i * dim + d]));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void export_embeddings(const Parameters<float>& params, const ModelConfig& model, const EpochDataset& dataset,
                       const std::string& out_path) {
  write_file_atomic(out_path, std::string_view(embeddings_tsv(params, model, dataset)));
}

std::string format_log_line(int epoch, std::string_view phase, double loss, double lr) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "epoch=%d phase=%.*s loss=%.17g lr=%.9g", epoch, static_cast<int>(phase.size()),
                phase.data(), loss, lr);
  return buf;
}

}  // namespace eegssl
