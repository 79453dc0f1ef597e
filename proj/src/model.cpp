#include "eegssl/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace eegssl {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string block_prefix(std::size_t i) { return "backbone.block" + std::to_string(i); }

int parse_int(std::string_view s, std::string_view key) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    fail(ErrorCode::ConfigError, "model config '" + std::string(key) + "' is not an integer: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = s.find(sep);
    parts.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s = s.substr(pos + 1);
  }
  return parts;
}

template <typename T>
void add_conv(Parameters<T>& p, const std::string& name, std::size_t out, std::size_t in, std::size_t k,
              std::uint64_t seed) {
  Tensor<T> w({out, in, k});
  RngStream rng(seed, {fnv1a(name)});
  const double bound = std::sqrt(6.0 / static_cast<double>(in * k));
  for (auto& v : w.values()) v = static_cast<T>(rng.uniform(-bound, bound));
  p.set(name + ".weight", std::move(w));
  p.set(name + ".bias", Tensor<T>({out}));
}

template <typename T>
void add_bn(Parameters<T>& p, const std::string& name, std::size_t channels) {
  p.set(name + ".scale", Tensor<T>({channels}, T(1)));
  p.set(name + ".shift", Tensor<T>({channels}));
  p.set(name + ".running_mean", Tensor<T>({channels}));
  p.set(name + ".running_var", Tensor<T>({channels}, T(1)));
}

template <typename T>
void add_dense(Parameters<T>& p, const std::string& name, std::size_t out, std::size_t in, std::uint64_t seed) {
  Tensor<T> w({out, in});
  RngStream rng(seed, {fnv1a(name)});
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  for (auto& v : w.values()) v = static_cast<T>(rng.uniform(-bound, bound));
  p.set(name + ".weight", std::move(w));
  p.set(name + ".bias", Tensor<T>({out}));
}

template <typename T>
NodeId conv_layer(Graph<T>& g, Parameters<T>& p, const std::string& name, NodeId x, std::size_t stride) {
  return conv1d(g, x, g.parameter(name + ".weight", p.at(name + ".weight")),
                g.parameter(name + ".bias", p.at(name + ".bias")), stride);
}

template <typename T>
NodeId bn_layer(Graph<T>& g, Parameters<T>& p, const std::string& name, NodeId x, Mode mode) {
  BatchNormState<T> state{&p.at(name + ".running_mean"), &p.at(name + ".running_var")};
  return batch_norm(g, x, g.parameter(name + ".scale", p.at(name + ".scale")),
                    g.parameter(name + ".shift", p.at(name + ".shift")), state, mode);
}

}  // namespace

std::string_view to_string(Preset preset) { return preset == Preset::Paper18 ? "paper18" : "tiny"; }

Preset preset_from_string(std::string_view name) {
  if (name == "paper18") return Preset::Paper18;
  if (name == "tiny") return Preset::Tiny;
  fail(ErrorCode::ConfigError, "unknown model preset '" + std::string(name) + "'");
}

ModelConfig ModelConfig::paper18() {
  ModelConfig c;
  c.preset = Preset::Paper18;
  c.conv_kernel = 32;
  c.stem_channels = 32;
  c.stem_stride = 1;
  for (int i = 0; i < 8; ++i) c.blocks.push_back({std::min(32 << (i / 2), 256), i % 2 == 1 ? 2 : 1});
  c.embedding_dim = 256;
  return c;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.preset = Preset::Tiny;
  c.conv_kernel = 16;
  c.stem_channels = 8;
  c.stem_stride = 4;
  c.blocks = {{8, 2}, {16, 2}};
  c.embedding_dim = 16;
  return c;
}

ModelConfig ModelConfig::for_preset(Preset preset) {
  return preset == Preset::Paper18 ? paper18() : tiny();
}

void ModelConfig::validate() const {
  const auto bad = [](const std::string& why) { fail(ErrorCode::InvalidSpec, "model: " + why); };
  if (conv_kernel < 1) bad("conv_kernel must be >= 1");
  if (stem_channels < 1 || stem_stride < 1) bad("stem channels and stride must be >= 1");
  int channels = stem_channels;
  for (const auto& b : blocks) {
    if (b.channels < channels) bad("block channels may not decrease");
    if (b.stride < 1) bad("block stride must be >= 1");
    channels = b.channels;
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) bad("dropout_rate must be in [0, 1)");
  for (int h : classifier_hidden) {
    if (h < 1) bad("classifier hidden sizes must be >= 1");
  }
  if (num_classes < 2) bad("num_classes must be >= 2");
  if (embedding_dim < 1) bad("embedding_dim must be >= 1");
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  char rate[32];
  std::snprintf(rate, sizeof(rate), "%.17g", dropout_rate);
  out << "preset=" << to_string(preset) << '\n'
      << "conv_kernel=" << conv_kernel << '\n'
      << "stem_channels=" << stem_channels << '\n'
      << "stem_stride=" << stem_stride << '\n'
      << "blocks=";
  for (std::size_t i = 0; i < blocks.size(); ++i) out << (i ? "," : "") << blocks[i].channels << '/' << blocks[i].stride;
  out << '\n' << "dropout_rate=" << rate << '\n' << "classifier_hidden=";
  for (std::size_t i = 0; i < classifier_hidden.size(); ++i) out << (i ? "," : "") << classifier_hidden[i];
  out << '\n' << "num_classes=" << num_classes << '\n' << "embedding_dim=" << embedding_dim << '\n';
  return out.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  ModelConfig c;
  c.blocks.clear();
  c.classifier_hidden.clear();
  for (auto line : split(text, '\n')) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::ConfigError, "model config line without '='");
    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 1);
    if (key == "preset") {
      c.preset = preset_from_string(value);
    } else if (key == "conv_kernel") {
      c.conv_kernel = parse_int(value, key);
    } else if (key == "stem_channels") {
      c.stem_channels = parse_int(value, key);
    } else if (key == "stem_stride") {
      c.stem_stride = parse_int(value, key);
    } else if (key == "blocks") {
      if (value.empty()) continue;
      for (auto item : split(value, ',')) {
        const auto slash = item.find('/');
        if (slash == std::string_view::npos) fail(ErrorCode::ConfigError, "block spec needs channels/stride");
        c.blocks.push_back({parse_int(item.substr(0, slash), key), parse_int(item.substr(slash + 1), key)});
      }
    } else if (key == "dropout_rate") {
      c.dropout_rate = std::stod(std::string(value));
    } else if (key == "classifier_hidden") {
      if (value.empty()) continue;
      for (auto item : split(value, ',')) c.classifier_hidden.push_back(parse_int(item, key));
    } else if (key == "num_classes") {
      c.num_classes = parse_int(value, key);
    } else if (key == "embedding_dim") {
      c.embedding_dim = parse_int(value, key);
    } else {
      fail(ErrorCode::ConfigError, "unknown model config key '" + std::string(key) + "'");
    }
  }
  c.validate();
  return c;
}

template <typename T>
Tensor<T>& Parameters<T>::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(ErrorCode::CheckpointShapeMismatch, "missing parameter '" + name + "'");
  return it->second;
}

template <typename T>
const Tensor<T>& Parameters<T>::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) fail(ErrorCode::CheckpointShapeMismatch, "missing parameter '" + name + "'");
  return it->second;
}

template <typename T>
bool Parameters<T>::is_trainable(std::string_view name) {
  return !name.ends_with(".running_mean") && !name.ends_with(".running_var");
}

template <typename T>
bool Parameters<T>::is_backbone(std::string_view name) {
  return name.starts_with("backbone.");
}

template <typename T>
std::size_t Parameters<T>::trainable_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) {
    if (is_trainable(name)) n += t.size();
  }
  return n;
}

template <typename T>
Parameters<T> init_parameters(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Parameters<T> p;
  const auto k = static_cast<std::size_t>(config.conv_kernel);
  auto channels = static_cast<std::size_t>(config.stem_channels);
  add_conv(p, "backbone.stem.conv", channels, 1, k, seed);
  add_bn(p, "backbone.stem.bn", channels);
  for (std::size_t i = 0; i < config.blocks.size(); ++i) {
    const auto out = static_cast<std::size_t>(config.blocks[i].channels);
    const auto prefix = block_prefix(i);
    add_conv(p, prefix + ".conv1", out, channels, k, seed);
    add_bn(p, prefix + ".bn1", out);
    add_conv(p, prefix + ".conv2", out, out, k, seed);
    add_bn(p, prefix + ".bn2", out);
    channels = out;
  }
  add_conv(p, "backbone.proj", static_cast<std::size_t>(config.embedding_dim), channels, 1, seed);
  auto features = static_cast<std::size_t>(config.embedding_dim);
  for (std::size_t j = 0; j < config.classifier_hidden.size(); ++j) {
    const auto out = static_cast<std::size_t>(config.classifier_hidden[j]);
    add_dense(p, "classifier.fc" + std::to_string(j), out, features, seed);
    features = out;
  }
  add_dense(p, "classifier.out", static_cast<std::size_t>(config.num_classes), features, seed);
  return p;
}

template <typename T>
NodeId forward_backbone(Graph<T>& g, Parameters<T>& p, const ModelConfig& config, NodeId input, Mode mode,
                        RngStream* rng) {
  const auto& x = g.value(input);
  if (x.rank() != 3 || x.dim(1) != 1) {
    fail(ErrorCode::ShapeMismatch, "backbone input must be (B, 1, L), got " + shape_string(x.shape()));
  }
  NodeId h = conv_layer(g, p, "backbone.stem.conv", input, static_cast<std::size_t>(config.stem_stride));
  h = relu(g, bn_layer(g, p, "backbone.stem.bn", h, mode));
  for (std::size_t i = 0; i < config.blocks.size(); ++i) {
    const auto& spec = config.blocks[i];
    const auto prefix = block_prefix(i);
    const auto stride = static_cast<std::size_t>(spec.stride);
    NodeId y = conv_layer(g, p, prefix + ".conv1", h, stride);
    y = relu(g, bn_layer(g, p, prefix + ".bn1", y, mode));
    RngStream block_rng = rng ? rng->derive(i) : RngStream(0);
    y = dropout(g, y, config.dropout_rate, rng ? &block_rng : nullptr, mode);
    y = conv_layer(g, p, prefix + ".conv2", y, 1);
    y = bn_layer(g, p, prefix + ".bn2", y, mode);
    const NodeId skip = shortcut(g, h, static_cast<std::size_t>(spec.channels), stride);
    h = relu(g, add(g, y, skip));
  }
  h = conv_layer(g, p, "backbone.proj", h, 1);
  return global_avg_pool(g, h);
}

template <typename T>
NodeId forward_classifier(Graph<T>& g, Parameters<T>& p, const ModelConfig& config, NodeId embeddings) {
  NodeId h = embeddings;
  for (std::size_t j = 0; j < config.classifier_hidden.size(); ++j) {
    const auto name = "classifier.fc" + std::to_string(j);
    h = relu(g, dense(g, h, g.parameter(name + ".weight", p.at(name + ".weight")),
                      g.parameter(name + ".bias", p.at(name + ".bias"))));
  }
  return dense(g, h, g.parameter("classifier.out.weight", p.at("classifier.out.weight")),
               g.parameter("classifier.out.bias", p.at("classifier.out.bias")));
}

template class Parameters<float>;
template class Parameters<double>;
template Parameters<float> init_parameters<float>(const ModelConfig&, std::uint64_t);
template Parameters<double> init_parameters<double>(const ModelConfig&, std::uint64_t);
template NodeId forward_backbone<float>(Graph<float>&, Parameters<float>&, const ModelConfig&, NodeId, Mode, RngStream*);
template NodeId forward_backbone<double>(Graph<double>&, Parameters<double>&, const ModelConfig&, NodeId, Mode,
                                         RngStream*);
template NodeId forward_classifier<float>(Graph<float>&, Parameters<float>&, const ModelConfig&, NodeId);
template NodeId forward_classifier<double>(Graph<double>&, Parameters<double>&, const ModelConfig&, NodeId);

}  // namespace eegssl
