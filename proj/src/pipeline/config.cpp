#include "tumorkit/pipeline/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "toml.hpp"

#include "tumorkit/error.hpp"
#include "tumorkit/random.hpp"

namespace tumorkit::pipeline {
namespace {

std::size_t line_of(const toml::node& n) {
  return n.source().begin.line;
}

[[noreturn]] void bad(const toml::node& n, const std::string& key, const std::string& what) {
  throw ParseError(line_of(n), "'" + key + "': " + what);
}

void check_keys(const toml::table& t, std::string_view section,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : t) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
      std::string where = section.empty() ? std::string(key.str())
                                          : std::string(section) + "." + std::string(key.str());
      throw ParseError(line_of(node), "unknown key '" + where + "'");
    }
  }
}

const toml::table* section(const toml::table& root, std::string_view name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) bad(*n, std::string(name), "expected a table");
  return n->as_table();
}

void read(const toml::table& t, std::string_view key, double& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) {
    out = *v;
    return;
  }
  bad(*n, std::string(key), "expected a number");
}

void read(const toml::table& t, std::string_view key, std::size_t& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_integer()) bad(*n, std::string(key), "expected an integer");
  const std::int64_t v = *n->value<std::int64_t>();
  if (v < 0) bad(*n, std::string(key), "must not be negative");
  out = static_cast<std::size_t>(v);
}

void read(const toml::table& t, std::string_view key, bool& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_boolean()) bad(*n, std::string(key), "expected true or false");
  out = *n->value<bool>();
}

void read(const toml::table& t, std::string_view key, std::string& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_string()) bad(*n, std::string(key), "expected a string");
  out = *n->value<std::string>();
}

void read_path(const toml::table& t, std::string_view key, const std::filesystem::path& base,
               std::filesystem::path& out) {
  std::string s;
  if (!t.get(key)) return;
  read(t, key, s);
  std::filesystem::path p(s);
  out = p.is_absolute() || base.empty() ? p : base / p;
}

template <class Parse>
auto rethrow_at(const toml::table& t, std::string_view key, Parse&& parse) {
  try {
    return parse();
  } catch (const InvalidArgument& e) {
    bad(*t.get(key), std::string(key), e.what());
  }
}

nn::LayerSpec parse_layer(const toml::table& t);

std::vector<nn::LayerSpec> parse_layers(const toml::node& n, const std::string& key) {
  const toml::array* arr = n.as_array();
  if (!arr) bad(n, key, "expected an array of tables");
  std::vector<nn::LayerSpec> out;
  for (const toml::node& item : *arr) {
    if (!item.is_table()) bad(item, key, "expected a table");
    out.push_back(parse_layer(*item.as_table()));
  }
  return out;
}

nn::LayerSpec parse_layer(const toml::table& t) {
  std::string type;
  read(t, "type", type);
  if (type == "conv") {
    check_keys(t, "layer", {"type", "filters", "kernel", "stride", "padding"});
    nn::ConvSpec c;
    read(t, "filters", c.filters);
    read(t, "kernel", c.kernel);
    read(t, "stride", c.stride);
    read(t, "padding", c.padding);
    return {c};
  }
  if (type == "batchnorm") {
    check_keys(t, "layer", {"type", "momentum", "epsilon"});
    nn::BatchNormSpec b;
    read(t, "momentum", b.momentum);
    read(t, "epsilon", b.epsilon);
    return {b};
  }
  if (type == "maxpool") {
    check_keys(t, "layer", {"type", "size", "stride"});
    nn::MaxPoolSpec p;
    read(t, "size", p.size);
    read(t, "stride", p.stride);
    return {p};
  }
  if (type == "dense") {
    check_keys(t, "layer", {"type", "units", "activation"});
    nn::DenseSpec d;
    read(t, "units", d.units);
    std::string act = "none";
    read(t, "activation", act);
    d.activation = rethrow_at(t, "activation", [&] { return nn::parse_activation(act); });
    return {d};
  }
  if (type == "residual") {
    check_keys(t, "layer", {"type", "inner", "projection"});
    nn::ResidualSpec r;
    read(t, "projection", r.projection);
    if (const toml::node* inner = t.get("inner")) r.inner = parse_layers(*inner, "inner");
    return {r};
  }
  check_keys(t, "layer", {"type"});
  if (type == "relu") return {nn::ReluSpec{}};
  if (type == "avgpool") return {nn::AvgPoolSpec{}};
  if (type == "flatten") return {nn::FlattenSpec{}};
  throw ParseError(line_of(t), "unknown layer type '" + type + "'");
}

void parse_preprocess(const toml::table& t, PreprocessConfig& out) {
  check_keys(t, "preprocess",
             {"steps", "smooth_kind", "smooth_kernel", "gaussian_sigma", "bilateral_radius",
              "bilateral_sigma_space", "bilateral_sigma_range", "resize_width", "resize_height"});
  std::string smooth_kind = "box";
  read(t, "smooth_kind", smooth_kind);
  if (smooth_kind != "box" && smooth_kind != "gaussian") {
    bad(*t.get("smooth_kind"), "smooth_kind", "expected \"box\" or \"gaussian\"");
  }
  std::size_t kernel = 7;
  double sigma = 1.5;
  BilateralParams bp;
  std::size_t width = 0, height = 0;
  read(t, "smooth_kernel", kernel);
  read(t, "gaussian_sigma", sigma);
  read(t, "bilateral_radius", bp.radius);
  read(t, "bilateral_sigma_space", bp.sigma_space);
  read(t, "bilateral_sigma_range", bp.sigma_range);
  read(t, "resize_width", width);
  read(t, "resize_height", height);

  std::vector<std::string> names{"smooth", "bilateral"};
  if (const toml::node* n = t.get("steps")) {
    const toml::array* arr = n->as_array();
    if (!arr) bad(*n, "steps", "expected an array of strings");
    names.clear();
    for (const toml::node& item : *arr) {
      if (!item.is_string()) bad(item, "steps", "expected an array of strings");
      names.push_back(*item.value<std::string>());
    }
  }
  out.steps.clear();
  for (const std::string& name : names) {
    const auto kind = rethrow_at(t, "steps", [&] { return parse_step_kind(name); });
    switch (kind) {
      case PreprocessStep::Kind::Smooth:
        out.steps.push_back(smooth_kind == "box" ? PreprocessStep::smoothing(kernel)
                                                 : PreprocessStep::gaussian(kernel, sigma));
        break;
      case PreprocessStep::Kind::Bilateral:
        out.steps.push_back(PreprocessStep::bilateral_step(bp));
        break;
      case PreprocessStep::Kind::Resize:
        if (width == 0 || height == 0) {
          bad(*t.get("steps"), "steps", "resize needs resize_width and resize_height");
        }
        out.steps.push_back(PreprocessStep::resizing(width, height));
        break;
    }
  }
}

void parse_segment(const toml::table& t, SegmentSection& out) {
  check_keys(t, "segment",
             {"k", "restarts", "max_iters", "tol", "k_max", "elbow_rule", "elbow_mode",
              "detect_threshold"});
  read(t, "k", out.kmeans.k);
  read(t, "restarts", out.kmeans.restarts);
  read(t, "max_iters", out.kmeans.max_iters);
  read(t, "tol", out.kmeans.tol);
  read(t, "k_max", out.k_max);
  read(t, "detect_threshold", out.detect_threshold);
  std::string rule, mode;
  read(t, "elbow_rule", rule);
  read(t, "elbow_mode", mode);
  if (rule == "log") out.rule = ElbowRule::LogSecondDifference;
  else if (rule == "linear") out.rule = ElbowRule::Linear;
  else if (!rule.empty()) bad(*t.get("elbow_rule"), "elbow_rule", "expected \"log\" or \"linear\"");
  if (mode == "pooled") out.mode = ElbowMode::Pooled;
  else if (mode == "per-image") out.mode = ElbowMode::PerImage;
  else if (!mode.empty()) {
    bad(*t.get("elbow_mode"), "elbow_mode", "expected \"pooled\" or \"per-image\"");
  }
}

void parse_network(const toml::table& t, nn::NetworkConfig& out) {
  check_keys(t, "network", {"preset", "input_height", "input_width", "input_channels", "layers"});
  nn::InputShape input = out.input;
  read(t, "input_height", input.height);
  read(t, "input_width", input.width);
  read(t, "input_channels", input.channels);
  std::string preset = "resnet-mini";
  read(t, "preset", preset);
  const toml::node* layers = t.get("layers");
  if (preset == "resnet-mini") {
    out = nn::resnet_mini(input);
  } else if (preset == "resnet50") {
    out = nn::resnet50(input);
  } else if (preset == "custom") {
    if (!layers) throw ParseError(line_of(t), "network preset \"custom\" needs [[network.layers]]");
    out.input = input;
    out.layers = parse_layers(*layers, "layers");
    return;
  } else {
    bad(*t.get("preset"), "preset", "expected \"resnet-mini\", \"resnet50\" or \"custom\"");
  }
  if (layers) bad(*layers, "layers", "only allowed with preset = \"custom\"");
}

}  // namespace

TrainInput parse_train_input(std::string_view name) {
  if (name == "raw") return TrainInput::Raw;
  if (name == "preprocessed") return TrainInput::Preprocessed;
  if (name == "masked") return TrainInput::Masked;
  throw InvalidArgument("unknown training input '" + std::string(name) +
                        "' (expected raw, preprocessed or masked)");
}

std::string_view train_input_name(TrainInput t) {
  switch (t) {
    case TrainInput::Raw: return "raw";
    case TrainInput::Preprocessed: return "preprocessed";
    case TrainInput::Masked: return "masked";
  }
  return "?";
}

void PipelineConfig::apply_seed(std::uint64_t top_seed) {
  seed = top_seed;
  split.seed = derive_seed(seed, "dataset", "split");
  network.seed = derive_seed(seed, "nn", "network");
  train.seed = derive_seed(seed, "train", "shuffle");
  train.augment.seed = derive_seed(seed, "augment", "stream");
  segment.kmeans.seed = derive_seed(seed, "segment", "kmeans");
}

KMeansConfig PipelineConfig::kmeans_for(std::string_view sample_id) const {
  KMeansConfig cfg = segment.kmeans;
  cfg.seed = derive_seed(segment.kmeans.seed, sample_id);
  return cfg;
}

void PipelineConfig::validate() const {
  split.validate();
  for (const auto& step : preprocess.steps) {
    if (step.kind == PreprocessStep::Kind::Bilateral) step.bilateral.validate();
    if (step.kind == PreprocessStep::Kind::Smooth && step.kernel_size % 2 == 0) {
      throw InvalidArgument("smoothing kernel must be odd");
    }
  }
  segment.kmeans.validate();
  if (segment.k_max < 3) throw InvalidArgument("segment.k_max must be at least 3");
  if (!(segment.detect_threshold >= 0.0 && segment.detect_threshold <= 1.0)) {
    throw InvalidArgument("segment.detect_threshold must lie in [0, 1]");
  }
  nn::validate(network);
  train.validate();
}

PipelineConfig default_config() {
  PipelineConfig cfg;
  cfg.apply_seed(0);
  return cfg;
}

PipelineConfig parse_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ParseError(e.source().begin.line, std::string(e.description()));
  }
  check_keys(root, "",
             {"seed", "out", "dataset", "preprocess", "segment", "augment", "network", "train"});

  PipelineConfig cfg;
  std::uint64_t seed = 0;
  read(root, "seed", seed);
  read_path(root, "out", base_dir, cfg.output_dir);

  if (const toml::table* t = section(root, "dataset")) {
    check_keys(*t, "dataset", {"manifest", "train_fraction", "stratify"});
    read_path(*t, "manifest", base_dir, cfg.manifest);
    read(*t, "train_fraction", cfg.split.train_fraction);
    read(*t, "stratify", cfg.split.stratify_by_label);
  }
  if (const toml::table* t = section(root, "preprocess")) parse_preprocess(*t, cfg.preprocess);
  if (const toml::table* t = section(root, "segment")) parse_segment(*t, cfg.segment);
  if (const toml::table* t = section(root, "augment")) {
    check_keys(*t, "augment",
               {"enabled", "rescale", "shear_range", "zoom_min", "zoom_max", "hflip_prob"});
    read(*t, "enabled", cfg.train.augment_enabled);
    read(*t, "rescale", cfg.train.augment.rescale);
    read(*t, "shear_range", cfg.train.augment.shear_range);
    read(*t, "zoom_min", cfg.train.augment.zoom_min);
    read(*t, "zoom_max", cfg.train.augment.zoom_max);
    read(*t, "hflip_prob", cfg.train.augment.hflip_prob);
  }
  if (const toml::table* t = section(root, "network")) parse_network(*t, cfg.network);
  if (const toml::table* t = section(root, "train")) {
    check_keys(*t, "train",
               {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "train_on"});
    read(*t, "epochs", cfg.train.epochs);
    read(*t, "batch_size", cfg.train.batch_size);
    read(*t, "learning_rate", cfg.train.learning_rate);
    read(*t, "beta1", cfg.train.beta1);
    read(*t, "beta2", cfg.train.beta2);
    read(*t, "epsilon", cfg.train.epsilon);
    std::string on;
    read(*t, "train_on", on);
    if (!on.empty()) cfg.train_on = rethrow_at(*t, "train_on", [&] { return parse_train_input(on); });
  }
  cfg.apply_seed(seed);
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace tumorkit::pipeline
