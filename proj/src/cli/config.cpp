#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>

#include <openssl/evp.h>

#include "corrspec/cli.hpp"
#include "corrspec/errors.hpp"

namespace corrspec::cli {

namespace {

using nlohmann::json;

// A JSON value together with its pointer path, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const json& raw() const { return *value_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config field " + (path_.empty() ? std::string("/") : path_) + ": " + what);
  }

  void require_object() const {
    if (!value_->is_object()) fail("expected an object");
  }

  void allow_keys(std::initializer_list<std::string_view> keys) const {
    require_object();
    for (const auto& [k, v] : value_->items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        Node(v, path_ + "/" + k).fail("unknown field");
      }
    }
  }

  std::optional<Node> find(const std::string& key) const {
    require_object();
    const auto it = value_->find(key);
    if (it == value_->end()) return std::nullopt;
    return Node(*it, path_ + "/" + key);
  }

  Node at(const std::string& key) const {
    auto n = find(key);
    if (!n) fail("missing required field '" + key + "'");
    return *n;
  }

  std::size_t size() const {
    if (!value_->is_array()) fail("expected an array");
    return value_->size();
  }

  Node at(std::size_t i) const {
    size();
    return Node((*value_)[i], path_ + "/" + std::to_string(i));
  }

  double number() const {
    if (!value_->is_number()) fail("expected a number");
    return value_->get<double>();
  }

  int integer() const {
    if (!value_->is_number_integer()) fail("expected an integer");
    const auto v = value_->get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail("integer out of range");
    return static_cast<int>(v);
  }

  std::uint64_t unsigned64() const {
    if (!value_->is_number_unsigned()) fail("expected a nonnegative integer");
    return value_->get<std::uint64_t>();
  }

  std::string string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }

  Offset offset() const {
    if (size() != 2) fail("expected a lattice point [row, col]");
    return Offset{at(std::size_t{0}).integer(), at(std::size_t{1}).integer()};
  }

  std::complex<double> complex() const {
    if (size() != 2) fail("expected a complex number [re, im]");
    return {at(std::size_t{0}).number(), at(std::size_t{1}).number()};
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
    return out;
  }

 private:
  const json* value_;
  std::string path_;
};

template <class F>
auto guarded(const Node& node, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    node.fail(e.what());
  } catch (const NumericError& e) {
    node.fail(e.what());
  }
}

InnovationSpec parse_innovations(const std::optional<Node>& node) {
  InnovationSpec spec;
  if (!node) return spec;
  node->allow_keys({"distribution", "variance"});
  if (auto d = node->find("distribution")) {
    spec.law = guarded(*d, [&] { return innovation_law_from_string(d->string()); });
  }
  if (auto v = node->find("variance")) spec.variance = v->number();
  guarded(*node, [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

std::map<Offset, double> parse_offsets(const Node& list, const char* key) {
  std::map<Offset, double> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node item = list.at(i);
    item.allow_keys({key, "value"});
    const Offset o = item.at(key).offset();
    if (!out.emplace(o, item.at("value").number()).second) item.fail("duplicate offset");
  }
  return out;
}

// a_{k,l} = a_k a_l from a one-dimensional factor.
std::map<Offset, double> parse_separable(const Node& list) {
  std::map<int, double> factor;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Node item = list.at(i);
    item.allow_keys({"index", "value"});
    if (!factor.emplace(item.at("index").integer(), item.at("value").number()).second) item.fail("duplicate index");
  }
  std::map<Offset, double> out;
  for (const auto& [k, a] : factor) {
    for (const auto& [l, b] : factor) out.emplace(Offset{k, l}, a * b);
  }
  return out;
}

FieldModel parse_model_object(const Node& node) {
  node.allow_keys({"type", "innovations", "coefficients", "separable", "linear", "quadratic", "gamma", "window"});
  const std::string type = node.at("type").string();
  const auto window = node.find("window");
  auto window_param = [&]() -> std::optional<WindowParameter> {
    if (!window) return std::nullopt;
    const int m = window->integer();
    if (m < 0) window->fail("window m must be nonnegative");
    return WindowParameter{m};
  };

  if (type == "iid") {
    return IidModel{parse_innovations(node.find("innovations"))};
  }
  if (type == "linear") {
    LinearModel model;
    model.innovations = parse_innovations(node.find("innovations"));
    const auto coeffs = node.find("coefficients");
    const auto separable = node.find("separable");
    if (coeffs && separable) node.fail("give either 'coefficients' or 'separable', not both");
    if (coeffs) {
      model.coeffs.values = parse_offsets(*coeffs, "offset");
    } else if (separable) {
      model.coeffs.values = parse_separable(*separable);
    } else {
      node.fail("linear model needs 'coefficients' or 'separable'");
    }
    if (model.coeffs.values.empty()) node.fail("linear filter has empty support");
    if (auto m = window_param()) model.coeffs = truncate_to_window(model.coeffs, *m);
    if (model.coeffs.values.empty()) node.fail("window removes every coefficient");
    return model;
  }
  if (type == "volterra") {
    VolterraModel model;
    model.innovations = parse_innovations(node.find("innovations"));
    if (auto lin = node.find("linear")) model.coeffs.linear = parse_offsets(*lin, "offset");
    if (auto quad = node.find("quadratic")) {
      for (std::size_t i = 0; i < quad->size(); ++i) {
        const Node item = quad->at(i);
        item.allow_keys({"u", "v", "value"});
        const auto key = std::pair{item.at("u").offset(), item.at("v").offset()};
        if (!model.coeffs.quadratic.emplace(key, item.at("value").number()).second) item.fail("duplicate pair");
      }
    }
    guarded(node, [&] {
      model.coeffs.validate();
      model.coeffs.bounds();
      return 0;
    });
    if (auto m = window_param()) model.coeffs = truncate_to_window(model.coeffs, *m);
    return model;
  }
  if (type == "gaussian_matched") {
    if (window) window->fail("window applies to linear and Volterra models only");
    const Node gamma = node.at("gamma");
    const auto lags = parse_offsets(gamma, "lag");
    return GaussianMatchedModel{guarded(gamma, [&] { return CovarianceFunction::from_lags(lags); })};
  }
  node.at("type").fail("unknown model type '" + type + "' (iid, linear, volterra, gaussian_matched)");
}

std::pair<FieldModel, json> parse_model(const Node& node, const std::filesystem::path& base_dir) {
  if (node.raw().is_string()) {
    std::filesystem::path file = node.string();
    if (file.is_relative()) file = base_dir / file;
    std::ifstream in(file);
    if (!in) node.fail("model file '" + file.string() + "' does not exist or is unreadable");
    json inlined;
    try {
      inlined = json::parse(in);
    } catch (const json::parse_error& e) {
      node.fail("model file '" + file.string() + "' is not valid JSON: " + e.what());
    }
    return {parse_model_object(Node(inlined, node.path())), inlined};
  }
  return {parse_model_object(node), node.raw()};
}

Command parse_command(const Node& node) {
  const std::string name = node.string();
  for (Command c : {Command::simulate, Command::solve, Command::compare, Command::universality,
                    Command::concentration, Command::selftest}) {
    if (to_string(c) == name) return c;
  }
  node.fail("unknown command '" + name + "'");
}

void parse_solver(const Node& node, SolverConfig& cfg) {
  node.allow_keys({"grid_size", "damping", "tolerance", "max_iterations", "eta_path"});
  if (auto v = node.find("grid_size")) cfg.grid_size = v->integer();
  if (auto v = node.find("damping")) cfg.damping = v->number();
  if (auto v = node.find("tolerance")) cfg.tolerance = v->number();
  if (auto v = node.find("max_iterations")) cfg.max_iterations = v->integer();
  if (auto v = node.find("eta_path")) cfg.eta_path = v->numbers();
  guarded(node, [&] {
    cfg.validate();
    return 0;
  });
}

void parse_ensemble(const Node& node, ExperimentConfig& cfg) {
  node.allow_keys({"kind", "mode", "aspect", "sizes", "replicates"});
  if (auto v = node.find("kind")) {
    const std::string kind = v->string();
    if (kind == "wigner") {
      cfg.ensemble = EnsembleKind::wigner;
    } else if (kind == "gram") {
      cfg.ensemble = EnsembleKind::gram;
    } else {
      v->fail("unknown ensemble kind '" + kind + "' (wigner, gram)");
    }
  }
  if (auto v = node.find("mode")) {
    const std::string mode = v->string();
    if (mode == "lower_triangle") {
      cfg.wigner_mode = WignerMode::lower_triangle;
    } else if (mode == "symmetrized_average") {
      cfg.wigner_mode = WignerMode::symmetrized_average;
    } else {
      v->fail("unknown Wigner mode '" + mode + "'");
    }
  }
  if (auto v = node.find("aspect")) cfg.aspect = v->number();
  if (auto v = node.find("sizes")) {
    cfg.sizes.clear();
    for (std::size_t i = 0; i < v->size(); ++i) cfg.sizes.push_back(v->at(i).integer());
  }
  if (auto v = node.find("replicates")) cfg.replicates = v->integer();
}

}  // namespace

std::string to_string(Command command) {
  switch (command) {
    case Command::simulate:
      return "simulate";
    case Command::solve:
      return "solve";
    case Command::compare:
      return "compare";
    case Command::universality:
      return "universality";
    case Command::concentration:
      return "concentration";
    case Command::selftest:
      return "selftest";
  }
  return "unknown";
}

std::string config_hash(const json& doc) {
  const std::string text = doc.dump();  // object keys are stored sorted
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw NumericError("SHA-256 digest failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return out.str();
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  const Node root(doc, "");
  root.allow_keys({"command", "seed", "output", "threads", "model", "ensemble", "solver", "z", "limit",
                   "concentration", "kernel"});
  RunConfig cfg;
  cfg.source = doc;
  cfg.command = parse_command(root.at("command"));
  ExperimentConfig& exp = cfg.experiment;
  exp.threads = std::max(1u, std::thread::hardware_concurrency());

  if (auto v = root.find("seed")) cfg.seed = v->unsigned64();
  exp.seed = cfg.seed;
  if (auto v = root.find("output")) cfg.output = v->string();
  if (auto v = root.find("threads")) {
    exp.threads = v->integer();
    if (exp.threads < 1) v->fail("threads must be at least 1");
  }
  if (auto v = root.find("model")) {
    auto [model, inlined] = parse_model(*v, base_dir);
    exp.model = std::move(model);
    cfg.source["model"] = std::move(inlined);
  }
  if (auto v = root.find("ensemble")) parse_ensemble(*v, exp);
  if (auto v = root.find("solver")) parse_solver(*v, exp.solver);
  if (auto v = root.find("z")) {
    exp.z_points.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto z = v->at(i).complex();
      if (!(z.imag() > 0.0)) v->at(i).fail("z must have Im z > 0");
      exp.z_points.push_back(z);
    }
    if (exp.z_points.empty()) v->fail("expected at least one z point");
  }
  if (auto v = root.find("limit")) {
    v->allow_keys({"eta", "energy_points", "levy_threshold", "energy_min", "energy_max"});
    if (auto e = v->find("eta")) exp.eta = e->number();
    if (auto e = v->find("energy_points")) exp.energy_points = e->integer();
    if (auto e = v->find("levy_threshold")) exp.levy_threshold = e->number();
    const auto lo = v->find("energy_min");
    const auto hi = v->find("energy_max");
    if (lo.has_value() != hi.has_value()) v->fail("give both energy_min and energy_max or neither");
    if (lo) {
      cfg.energy_window = std::pair{lo->number(), hi->number()};
      if (!(cfg.energy_window->second > cfg.energy_window->first)) v->fail("energy_max must exceed energy_min");
    }
  }
  if (auto v = root.find("concentration")) {
    v->allow_keys({"dependence", "radii"});
    if (auto d = v->find("dependence")) cfg.dependence = d->integer();
    if (auto r = v->find("radii")) cfg.radii = r->numbers();
  }
  if (auto v = root.find("kernel")) {
    v->allow_keys({"constant"});
    KernelOverride k;
    k.constant = v->at("constant").number();
    if (!(k.constant >= 0.0)) v->at("constant").fail("constant kernel must be nonnegative");
    cfg.kernel = k;
  }

  const bool needs_model = cfg.command != Command::selftest && !(cfg.command == Command::solve && cfg.kernel);
  if (needs_model && !root.find("model")) root.fail("command '" + to_string(cfg.command) + "' needs a 'model'");

  switch (cfg.command) {
    case Command::simulate:
    case Command::compare:
    case Command::universality:
    case Command::concentration:
      guarded(root, [&] {
        exp.validate();
        return 0;
      });
      break;
    case Command::solve:
      if (!(exp.eta > 0.0)) root.fail("limit eta must be positive");
      if (exp.energy_points < 16) root.fail("limit energy_points must be at least 16");
      if (cfg.experiment.ensemble == EnsembleKind::gram && !(exp.aspect > 0.0)) root.fail("aspect must be positive");
      break;
    case Command::selftest:
      break;
  }
  if (cfg.command == Command::concentration) {
    if (cfg.dependence < 0) root.fail("concentration dependence must be nonnegative");
    for (double r : cfg.radii) {
      if (!(r >= 0.0)) root.fail("concentration radii must be nonnegative");
    }
  }
  cfg.hash = config_hash(cfg.source);
  exp.config_hash = cfg.hash;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace corrspec::cli
