#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eegssl/checkpoint.hpp"
#include "eegssl/contrastive.hpp"
#include "eegssl/epochs.hpp"
#include "eegssl/metrics.hpp"
#include "eegssl/model.hpp"
#include "eegssl/transforms.hpp"

namespace eegssl {

struct TrainConfig {
  double temperature = kDefaultTemperature;
  std::size_t ssl_batch = 512;  // 2N views per step
  std::size_t cls_batch = 256;
  int ssl_epochs = 70;
  int cls_epochs = 70;
  double ssl_lr = 0.1;
  double cls_lr = 0.01;
  double warmup_epochs = 5.0;
  double momentum = 0.9;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  TransformSpec t1 = TransformSpec::defaults(TransformKind::CropResize);
  TransformSpec t2 = TransformSpec::defaults(TransformKind::Permutation);
  LossMode loss_mode = LossMode::Paper;

  /// Throws InvalidSpec.
  void validate() const;
};

enum class SplitBy { Subject, Record };

std::string_view to_string(SplitBy by);
SplitBy split_by_from_string(std::string_view name);

struct SplitSpec {
  SplitBy by = SplitBy::Subject;
  double test_fraction = 0.2;
  std::optional<std::size_t> k_per_class;
  int repetitions = 100;
};

/// Grouping key of an epoch: the record name (source id up to the first ':'),
/// or for subject splits the Sleep-EDF subject code (`SC4ssN...` -> `SC4ss`)
/// when the record name has that form.
std::string split_key(const Epoch& epoch, SplitBy by);

struct DataSplit {
  std::vector<std::size_t> train;  // labeled epochs only
  std::vector<std::size_t> test;
  std::vector<std::string> test_keys;
};

/// Sorts the distinct keys and holds out the last ceil(fraction * keys) of
/// them (at least one, never all).
DataSplit split_dataset(const EpochDataset& dataset, const SplitSpec& spec);

/// Indices of epochs whose key is not in `excluded_keys`.
std::vector<std::size_t> exclude_keys(const EpochDataset& dataset, SplitBy by,
                                      const std::vector<std::string>& excluded_keys);

using LogFn = std::function<void(const std::string& line)>;

struct PretrainResult {
  Parameters<float> params;
  std::vector<double> epoch_losses;
};

/// Contrastive pretraining of the backbone. Starts from `initial` when
/// given, else from init_parameters(model, cfg.seed). Labels are ignored.
PretrainResult pretrain(const TrainConfig& cfg, const EpochDataset& unlabeled, const ModelConfig& model,
                        const Parameters<float>* initial = nullptr, const LogFn& log = {});

struct ClassificationResult {
  MetricsReport metrics;
  std::vector<double> epoch_losses;
  Parameters<float> params;
};

/// Frozen backbone (eval-mode statistics), classifier trained on `train`.
ClassificationResult linear_eval(const Parameters<float>& params, const ModelConfig& model,
                                 const EpochDataset& labeled, const DataSplit& split, const TrainConfig& cfg,
                                 const LogFn& log = {});

/// All parameters trainable.
ClassificationResult finetune(const Parameters<float>& params, const ModelConfig& model,
                              const EpochDataset& labeled, const DataSplit& split, const TrainConfig& cfg,
                              const LogFn& log = {});

/// Eval-mode predictions (class indices) for the given epochs.
std::vector<int> predict(const Parameters<float>& params, const ModelConfig& model, const EpochDataset& dataset,
                         const std::vector<std::size_t>& indices);

/// Eval-mode backbone outputs, row-major (indices.size(), embedding_dim).
std::vector<float> embed(const Parameters<float>& params, const ModelConfig& model, const EpochDataset& dataset,
                         const std::vector<std::size_t>& indices);

struct ArmStats {
  std::vector<double> accuracy;
  std::vector<double> macro_f1;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;  // sample std, 0 for one repetition
  double macro_f1_mean = 0.0;
  double macro_f1_std = 0.0;
};

struct LimitedResult {
  std::size_t k_per_class = 0;
  int repetitions = 0;
  ArmStats random_init;
  ArmStats ssl;

  std::string to_json() const;
};

/// Draws k training epochs per class without replacement, reproducible from
/// (seed, repetition). Throws InsufficientClassSamples.
std::vector<std::size_t> draw_per_class(const EpochDataset& dataset, const std::vector<std::size_t>& pool,
                                        std::size_t k, std::uint64_t seed, int repetition);

/// Per repetition r (seed cfg.seed + r): random-init arm finetunes
/// init_parameters(model, seed); the SSL arm finetunes the pretrained backbone
/// with the same freshly initialized classifier. Both evaluate on split.test.
LimitedResult limited_sample_experiment(const Parameters<float>& pretrained, const ModelConfig& model,
                                        const EpochDataset& labeled, const DataSplit& split, std::size_t k,
                                        int repetitions, const TrainConfig& cfg, const LogFn& log = {});

/// TSV: `source_id\tlabel\te0...e{D-1}`, 9 significant digits; label is the
/// stage name or `-` when unscored.
std::string embeddings_tsv(const Parameters<float>& params, const ModelConfig& model, const EpochDataset& dataset);
void export_embeddings(const Parameters<float>& params, const ModelConfig& model, const EpochDataset& dataset,
                       const std::string& out_path);

/// `epoch=<i> phase=<ssl|cls> loss=<mean> lr=<value>`
std::string format_log_line(int epoch, std::string_view phase, double loss, double lr);

}  // namespace eegssl
