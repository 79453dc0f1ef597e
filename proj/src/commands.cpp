#include "eegssl/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "eegssl/binary_io.hpp"
#include "eegssl/checkpoint.hpp"
#include "eegssl/config.hpp"
#include "eegssl/dataset.hpp"
#include "eegssl/edf.hpp"
#include "eegssl/hypnogram.hpp"
#include "eegssl/synth.hpp"
#include "eegssl/training.hpp"

namespace eegssl {
namespace {

namespace fs = std::filesystem;

struct Context {
  RunConfig config;
  std::ostream& out;
  std::ofstream log_file;

  std::string in_out(const std::string& file) const { return (fs::path(config.out_dir) / file).string(); }
  std::string dataset_path() const { return config.data_cache.empty() ? in_out("dataset.bin") : config.data_cache; }
  std::string checkpoint_path() const {
    return config.checkpoint.empty() ? in_out("checkpoint.bin") : config.checkpoint;
  }

  void open_log(const std::string& name) {
    const auto path = in_out(name + ".log");
    log_file.open(path, std::ios::trunc);
    if (!log_file) fail(ErrorCode::IoError, "cannot open log '" + path + "'");
  }
  LogFn logger() {
    return [this](const std::string& line) {
      out << line << '\n';
      log_file << line << '\n';
      log_file.flush();
    };
  }
};

RunConfig resolve(const CommandOptions& o) {
  RunConfig c;
  if (o.config_path) c = read_run_config(*o.config_path);
  std::vector<std::string> problems;
  for (const auto& s : o.settings) {
    const auto eq = s.find('=');
    try {
      if (eq == std::string::npos) fail(ErrorCode::ConfigError, "--set expects key=value, got '" + s + "'");
      apply_setting(c, s.substr(0, eq), s.substr(eq + 1));
    } catch (const Error& e) {
      problems.push_back(e.message());
    }
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " invalid override(s)";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorCode::ConfigError, msg);
  }
  if (o.seed) c.train.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.k_per_class) c.split.k_per_class = *o.k_per_class;
  if (o.repetitions) c.split.repetitions = *o.repetitions;
  if (o.classes) c.synth.classes = *o.classes;
  if (o.per_class) c.synth.per_class = *o.per_class;
  if (!o.edf_paths.empty()) c.edf_paths = o.edf_paths;
  if (!o.hypnogram_paths.empty()) c.hypnogram_paths = o.hypnogram_paths;
  if (o.output && !o.output->empty()) c.data_cache = *o.output;
  try {
    c.model.validate();
    c.train.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, e.message());
  }
  return c;
}

void print_histogram(std::ostream& out, const EpochDataset& d) {
  out << "epochs=" << d.size();
  for (auto s : kAllStages) out << ' ' << stage_name(s) << '=' << d.class_histogram()[stage_index(s)];
  out << '\n';
}

int cmd_ingest(Context& ctx) {
  const auto& c = ctx.config;
  if (c.edf_paths.empty()) fail(ErrorCode::ConfigError, "ingest needs at least one EDF file");
  if (c.edf_paths.size() != c.hypnogram_paths.size()) {
    fail(ErrorCode::ConfigError, std::to_string(c.edf_paths.size()) + " EDF files but " +
                                     std::to_string(c.hypnogram_paths.size()) + " hypnograms");
  }
  std::vector<EpochDataset> parts;
  for (std::size_t i = 0; i < c.edf_paths.size(); ++i) {
    const auto record = read_edf_file(c.edf_paths[i]);
    const auto hyp = read_hypnogram_file(c.hypnogram_paths[i]);
    EpochingOptions opts;
    opts.channel_label = c.channel;
    opts.source_name = fs::path(c.edf_paths[i]).stem().string();
    try {
      parts.push_back(extract_epochs(record, hyp, opts));
    } catch (const Error& e) {
      throw Error(e.code(), c.edf_paths[i] + ": " + e.message());
    }
  }
  const auto merged = EpochDataset::merge(parts);
  write_dataset_cache(ctx.dataset_path(), merged);
  print_histogram(ctx.out, merged);
  ctx.out << "wrote " << ctx.dataset_path() << '\n';
  return kExitOk;
}

int cmd_synth(Context& ctx) {
  auto opts = ctx.config.synth;
  opts.seed = ctx.config.train.seed;
  const auto data = synthesize(opts);
  write_dataset_cache(ctx.dataset_path(), data);
  print_histogram(ctx.out, data);
  ctx.out << "wrote " << ctx.dataset_path() << '\n';
  return kExitOk;
}

Parameters<float> load_params(const Context& ctx) {
  const auto& c = ctx.config;
  if (c.checkpoint == "random") return init_parameters<float>(c.model, c.train.seed);
  const auto ck = read_checkpoint(ctx.checkpoint_path());
  auto params = init_parameters<float>(c.model, 0);
  try {
    load_into(params, ck.params);
  } catch (const Error& e) {
    throw Error(e.code(), ctx.checkpoint_path() + ": " + e.message());
  }
  return params;
}

int cmd_pretrain(Context& ctx) {
  const auto& c = ctx.config;
  const auto pretrain_path = c.pretrain_cache.empty() ? ctx.dataset_path() : c.pretrain_cache;
  auto data = read_dataset_cache(pretrain_path);
  if (c.exclude_test_from_pretraining) {
    const auto labeled_path = ctx.dataset_path();
    std::optional<EpochDataset> labeled;
    if (labeled_path == pretrain_path) {
      labeled = data;
    } else if (fs::exists(labeled_path)) {
      labeled = read_dataset_cache(labeled_path);
    }
    std::size_t labeled_epochs = 0;
    if (labeled) {
      for (auto n : labeled->class_histogram()) labeled_epochs += n;
    }
    if (labeled_epochs > 0) {
      const auto split = split_dataset(*labeled, c.split);
      const auto keep = exclude_keys(data, c.split.by, split.test_keys);
      ctx.out << "excluding " << data.size() - keep.size() << " held-out epochs from pretraining\n";
      data = data.select(keep);
    }
  }
  ctx.open_log("pretrain");
  const auto result = pretrain(c.train, data, c.model, nullptr, ctx.logger());
  write_checkpoint(ctx.checkpoint_path(), c.model, result.params);
  ctx.out << "wrote " << ctx.checkpoint_path() << '\n';
  return kExitOk;
}

int cmd_classify(Context& ctx, bool frozen) {
  const auto& c = ctx.config;
  const auto name = std::string(frozen ? "linear_eval" : "finetune");
  const auto params = load_params(ctx);
  const auto data = read_dataset_cache(ctx.dataset_path());
  const auto split = split_dataset(data, c.split);
  ctx.open_log(name);
  const auto result = frozen ? linear_eval(params, c.model, data, split, c.train, ctx.logger())
                             : finetune(params, c.model, data, split, c.train, ctx.logger());
  const auto path = ctx.in_out(name + ".json");
  write_file_atomic(path, std::string_view(result.metrics.to_json()));
  ctx.out << "accuracy=" << result.metrics.accuracy << " macro_f1=" << result.metrics.macro_f1 << '\n';
  ctx.out << "wrote " << path << '\n';
  return kExitOk;
}

int cmd_limited(Context& ctx) {
  const auto& c = ctx.config;
  if (!c.split.k_per_class) fail(ErrorCode::ConfigError, "limited needs --k or split.k_per_class");
  const auto params = load_params(ctx);
  const auto data = read_dataset_cache(ctx.dataset_path());
  const auto split = split_dataset(data, c.split);
  ctx.open_log("limited");
  const auto r = limited_sample_experiment(params, c.model, data, split, *c.split.k_per_class, c.split.repetitions,
                                           c.train, ctx.logger());
  const auto path = ctx.in_out("limited_k" + std::to_string(r.k_per_class) + ".json");
  write_file_atomic(path, std::string_view(r.to_json()));
  char line[256];
  std::snprintf(line, sizeof(line),
                "k=%zu reps=%d random_init accuracy=%.4f±%.4f macro_f1=%.4f±%.4f | ssl accuracy=%.4f±%.4f "
                "macro_f1=%.4f±%.4f",
                r.k_per_class, r.repetitions, r.random_init.accuracy_mean, r.random_init.accuracy_std,
                r.random_init.macro_f1_mean, r.random_init.macro_f1_std, r.ssl.accuracy_mean, r.ssl.accuracy_std,
                r.ssl.macro_f1_mean, r.ssl.macro_f1_std);
  ctx.out << line << '\n' << "wrote " << path << '\n';
  return kExitOk;
}

int cmd_export(Context& ctx, const std::optional<std::string>& output) {
  const auto params = load_params(ctx);
  const auto data = read_dataset_cache(ctx.dataset_path());
  const auto path = output ? *output : ctx.in_out("embeddings.tsv");
  export_embeddings(params, ctx.config.model, data, path);
  ctx.out << "wrote " << path << '\n';
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (category(e.code())) {
    case ErrorCategory::Config:
      return kExitConfig;
    case ErrorCategory::Numeric:
      return kExitNumeric;
    case ErrorCategory::Data:
      break;
  }
  return kExitData;
}

}  // namespace

std::vector<std::string> command_names() {
  return {"ingest", "synth", "pretrain", "linear-eval", "finetune", "limited", "export-embeddings"};
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    auto opts = options;
    if (name == "export-embeddings") opts.output.reset();
    Context ctx{resolve(opts), out, {}};
    fs::create_directories(ctx.config.out_dir);
    write_file_atomic(ctx.in_out("config.resolved"), std::string_view(resolved_config_text(ctx.config)));
    if (name == "ingest") return cmd_ingest(ctx);
    if (name == "synth") return cmd_synth(ctx);
    if (name == "pretrain") return cmd_pretrain(ctx);
    if (name == "linear-eval") return cmd_classify(ctx, true);
    if (name == "finetune") return cmd_classify(ctx, false);
    if (name == "limited") return cmd_limited(ctx);
    if (name == "export-embeddings") return cmd_export(ctx, options.output);
    fail(ErrorCode::ConfigError, "unknown command '" + name + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace eegssl
