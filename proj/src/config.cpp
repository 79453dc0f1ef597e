#include "eegssl/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>

#include "eegssl/binary_io.hpp"

namespace eegssl {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view what, std::string_view value) {
  fail(ErrorCode::ConfigError, "expected " + std::string(what) + ", got '" + std::string(value) + "'");
}

double to_double(std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value("a number", v);
  return out;
}

template <typename Int>
Int to_int(std::string_view v) {
  Int out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value("an integer", v);
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value("true or false", v);
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    v = v.substr(comma + 1);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string quoted(std::string_view s) { return "\"" + std::string(s) + "\""; }

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::vector<Field> transform_fields(const std::string& prefix, TransformSpec TrainConfig::*member) {
  const auto spec = [member](RunConfig& c) -> TransformSpec& { return c.train.*member; };
  const auto cspec = [member](const RunConfig& c) -> const TransformSpec& { return c.train.*member; };
  return {
      {prefix, [=](RunConfig& c, std::string_view v) { spec(c) = TransformSpec::defaults(transform_kind_from_string(v)); },
       [=](const RunConfig& c) { return quoted(to_string(cspec(c).kind)); }},
      {prefix + ".segments_min", [=](RunConfig& c, std::string_view v) { spec(c).num_segments.lo = to_int<int>(v); },
       [=](const RunConfig& c) { return std::to_string(cspec(c).num_segments.lo); }},
      {prefix + ".segments_max", [=](RunConfig& c, std::string_view v) { spec(c).num_segments.hi = to_int<int>(v); },
       [=](const RunConfig& c) { return std::to_string(cspec(c).num_segments.hi); }},
      {prefix + ".scale_min", [=](RunConfig& c, std::string_view v) { spec(c).scale_lo = to_double(v); },
       [=](const RunConfig& c) { return num(cspec(c).scale_lo); }},
      {prefix + ".scale_max", [=](RunConfig& c, std::string_view v) { spec(c).scale_hi = to_double(v); },
       [=](const RunConfig& c) { return num(cspec(c).scale_hi); }},
      {prefix + ".mu", [=](RunConfig& c, std::string_view v) { spec(c).mu = to_double(v); },
       [=](const RunConfig& c) { return num(cspec(c).mu); }},
      {prefix + ".sigma_ratio", [=](RunConfig& c, std::string_view v) { spec(c).sigma_ratio = to_double(v); },
       [=](const RunConfig& c) { return num(cspec(c).sigma_ratio); }},
      {prefix + ".filter_min", [=](RunConfig& c, std::string_view v) { spec(c).filter_length.lo = to_int<int>(v); },
       [=](const RunConfig& c) { return std::to_string(cspec(c).filter_length.lo); }},
      {prefix + ".filter_max", [=](RunConfig& c, std::string_view v) { spec(c).filter_length.hi = to_int<int>(v); },
       [=](const RunConfig& c) { return std::to_string(cspec(c).filter_length.hi); }},
  };
}

#define STRING_FIELD(key, expr) \
  {key, [](RunConfig& c, std::string_view v) { c.expr = std::string(v); }, [](const RunConfig& c) { return quoted(c.expr); }}
#define DOUBLE_FIELD(key, expr) \
  {key, [](RunConfig& c, std::string_view v) { c.expr = to_double(v); }, [](const RunConfig& c) { return num(c.expr); }}
#define INT_FIELD(key, expr, type)                                                \
  {key, [](RunConfig& c, std::string_view v) { c.expr = to_int<type>(v); }, \
   [](const RunConfig& c) { return std::to_string(c.expr); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f = {
        STRING_FIELD("data.cache", data_cache),
        STRING_FIELD("data.pretrain_cache", pretrain_cache),
        {"data.edf", [](RunConfig& c, std::string_view v) { c.edf_paths = to_list(v); },
         [](const RunConfig& c) { return quoted(join(c.edf_paths)); }},
        {"data.hypnogram", [](RunConfig& c, std::string_view v) { c.hypnogram_paths = to_list(v); },
         [](const RunConfig& c) { return quoted(join(c.hypnogram_paths)); }},
        STRING_FIELD("data.channel", channel),
        STRING_FIELD("checkpoint", checkpoint),
        STRING_FIELD("out", out_dir),
        INT_FIELD("seed", train.seed, std::uint64_t),
        {"model.preset", [](RunConfig& c, std::string_view v) { c.model = ModelConfig::for_preset(preset_from_string(v)); },
         [](const RunConfig& c) { return quoted(to_string(c.model.preset)); }},
        INT_FIELD("model.conv_kernel", model.conv_kernel, int),
        INT_FIELD("model.stem_channels", model.stem_channels, int),
        INT_FIELD("model.stem_stride", model.stem_stride, int),
        {"model.blocks",
         [](RunConfig& c, std::string_view v) {
           c.model.blocks.clear();
           for (const auto& item : to_list(v)) {
             const auto slash = item.find('/');
             if (slash == std::string::npos) bad_value("channels/stride", item);
             c.model.blocks.push_back({to_int<int>(std::string_view(item).substr(0, slash)),
                                       to_int<int>(std::string_view(item).substr(slash + 1))});
           }
         },
         [](const RunConfig& c) {
           std::vector<std::string> items;
           for (const auto& b : c.model.blocks) items.push_back(std::to_string(b.channels) + "/" + std::to_string(b.stride));
           return quoted(join(items));
         }},
        DOUBLE_FIELD("model.dropout_rate", model.dropout_rate),
        {"model.classifier_hidden",
         [](RunConfig& c, std::string_view v) {
           c.model.classifier_hidden.clear();
           for (const auto& item : to_list(v)) c.model.classifier_hidden.push_back(to_int<int>(item));
         },
         [](const RunConfig& c) {
           std::vector<std::string> items;
           for (int h : c.model.classifier_hidden) items.push_back(std::to_string(h));
           return quoted(join(items));
         }},
        INT_FIELD("model.num_classes", model.num_classes, int),
        INT_FIELD("model.embedding_dim", model.embedding_dim, int),
        DOUBLE_FIELD("train.temperature", train.temperature),
        INT_FIELD("train.ssl_batch", train.ssl_batch, std::size_t),
        INT_FIELD("train.cls_batch", train.cls_batch, std::size_t),
        INT_FIELD("train.ssl_epochs", train.ssl_epochs, int),
        INT_FIELD("train.cls_epochs", train.cls_epochs, int),
        DOUBLE_FIELD("train.ssl_lr", train.ssl_lr),
        DOUBLE_FIELD("train.cls_lr", train.cls_lr),
        DOUBLE_FIELD("train.warmup_epochs", train.warmup_epochs),
        DOUBLE_FIELD("train.momentum", train.momentum),
        DOUBLE_FIELD("train.l2", train.l2),
        {"train.loss_mode", [](RunConfig& c, std::string_view v) { c.train.loss_mode = loss_mode_from_string(v); },
         [](const RunConfig& c) { return quoted(to_string(c.train.loss_mode)); }},
        {"split.by", [](RunConfig& c, std::string_view v) { c.split.by = split_by_from_string(v); },
         [](const RunConfig& c) { return quoted(to_string(c.split.by)); }},
        DOUBLE_FIELD("split.test_fraction", split.test_fraction),
        {"split.k_per_class",
         [](RunConfig& c, std::string_view v) {
           if (v.empty() || v == "none") {
             c.split.k_per_class.reset();
           } else {
             c.split.k_per_class = to_int<std::size_t>(v);
           }
         },
         [](const RunConfig& c) { return c.split.k_per_class ? std::to_string(*c.split.k_per_class) : quoted("none"); }},
        INT_FIELD("split.repetitions", split.repetitions, int),
        {"split.exclude_test_from_pretraining",
         [](RunConfig& c, std::string_view v) { c.exclude_test_from_pretraining = to_bool(v); },
         [](const RunConfig& c) { return std::string(c.exclude_test_from_pretraining ? "true" : "false"); }},
        INT_FIELD("synth.classes", synth.classes, int),
        INT_FIELD("synth.per_class", synth.per_class, std::size_t),
        DOUBLE_FIELD("synth.noise", synth.noise),
        DOUBLE_FIELD("synth.jitter", synth.jitter),
    };
    for (auto&& t : transform_fields("transform.t1", &TrainConfig::t1)) f.push_back(std::move(t));
    for (auto&& t : transform_fields("transform.t2", &TrainConfig::t2)) f.push_back(std::move(t));
    return f;
  }();
  return table;
}

#undef STRING_FIELD
#undef DOUBLE_FIELD
#undef INT_FIELD

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::string_view unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

// Keys that replace whole groups are applied before the keys refining them.
int priority(std::string_view key) {
  if (key == "model.preset" || key == "transform.t1" || key == "transform.t2") return 0;
  return 1;
}

}  // namespace

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  const auto* f = find_field(key);
  if (!f) fail(ErrorCode::ConfigError, "unknown config key '" + std::string(key) + "'");
  try {
    f->set(config, unquote(trim(value)));
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, std::string(key) + ": " + e.message());
  }
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  struct Entry {
    std::string key;
    std::string value;
    int line;
  };
  std::vector<Entry> entries;
  std::vector<std::string> problems;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quotes = !in_quotes;
      if (line[i] == '#' && !in_quotes) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    entries.push_back({std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return priority(a.key) < priority(b.key); });
  for (const auto& e : entries) {
    if (!find_field(e.key)) {
      problems.push_back("line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
      continue;
    }
    try {
      apply_setting(base, e.key, e.value);
    } catch (const Error& err) {
      problems.push_back("line " + std::to_string(e.line) + ": " + err.message());
    }
  }
  if (!problems.empty()) {
    std::string msg = std::to_string(problems.size()) + " invalid setting(s)";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorCode::ConfigError, msg);
  }
  return base;
}

RunConfig read_run_config(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_run_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

std::string resolved_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace eegssl
