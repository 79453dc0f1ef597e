#include <iostream>

#include "CLI11.hpp"
#include "eegssl/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Contrastive self-supervised pretraining for single-channel sleep EEG"};
  app.require_subcommand(1);

  eegssl::CommandOptions opts;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  const auto add_globals = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run config file (key = value lines)");
    cmd->add_option("--seed", seed, "Seed, overrides the config");
    cmd->add_option("--out", out_dir, "Output directory for this run");
    cmd->add_option("--set", opts.settings, "Config override key=value (repeatable)");
  };

  std::size_t k = 0;
  int reps = 0;
  int classes = 0;
  std::size_t per_class = 0;
  std::string output;

  auto* ingest = app.add_subcommand("ingest", "Build a dataset cache from EDF recordings and hypnograms");
  add_globals(ingest);
  ingest->add_option("--edf", opts.edf_paths, "PSG recordings (EDF/EDF+)");
  ingest->add_option("--hypnogram", opts.hypnogram_paths, "Hypnograms (EDF+ or text), one per recording");
  ingest->add_option("--cache", output, "Output dataset cache");

  auto* synth = app.add_subcommand("synth", "Write a synthetic labeled dataset cache");
  add_globals(synth);
  synth->add_option("--classes", classes, "Number of classes (1..5)");
  synth->add_option("--per-class", per_class, "Epochs per class");
  synth->add_option("--cache", output, "Output dataset cache");

  for (const char* name : {"pretrain", "linear-eval", "finetune"}) add_globals(app.add_subcommand(name));
  app.get_subcommand("pretrain")->description("Contrastive pretraining of the backbone");
  app.get_subcommand("linear-eval")->description("Train the classifier on a frozen pretrained backbone");
  app.get_subcommand("finetune")->description("Fine-tune all weights from a checkpoint");

  auto* limited = app.add_subcommand("limited", "Limited labeled samples: random init vs SSL fine-tuning");
  add_globals(limited);
  limited->add_option("--k", k, "Labeled epochs per class");
  limited->add_option("--reps", reps, "Repetitions");

  auto* exp = app.add_subcommand("export-embeddings", "Write backbone embeddings as TSV");
  add_globals(exp);
  exp->add_option("--output", output, "TSV path (default <out>/embeddings.tsv)");

  CLI11_PARSE(app, argc, argv);

  auto* cmd = app.get_subcommands().front();
  if (cmd->count("--config")) opts.config_path = config_path;
  if (cmd->count("--seed")) opts.seed = seed;
  if (cmd->count("--out")) opts.out_dir = out_dir;
  if (cmd->get_option_no_throw("--k") && cmd->count("--k")) opts.k_per_class = k;
  if (cmd->get_option_no_throw("--reps") && cmd->count("--reps")) opts.repetitions = reps;
  if (cmd->get_option_no_throw("--classes") && cmd->count("--classes")) opts.classes = classes;
  if (cmd->get_option_no_throw("--per-class") && cmd->count("--per-class")) opts.per_class = per_class;
  if (!output.empty()) opts.output = output;
  return eegssl::run_command(cmd->get_name(), opts, std::cout, std::cerr);
}
