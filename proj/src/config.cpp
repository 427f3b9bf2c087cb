#include "nrc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "nrc/errors.hpp"

namespace nrc {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quote) {
      if (ch == quote) quote = 0;
    } else if (ch == '"' || ch == '\'') {
      quote = ch;
    } else if (ch == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(unquote(trim(cur)));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(unquote(trim(cur)));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += fmt(items[i]);
    } else if constexpr (std::is_same_v<T, std::string>) {
      out += items[i];
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": out of range");
  }
  return static_cast<int>(x);
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer seed, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <class E>
E to_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> table) {
  std::string allowed;
  for (const auto& [name, value] : table) {
    if (v == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(key + ": unknown value '" + v + "' (expected " + allowed + ")");
}

const std::initializer_list<std::pair<const char*, GraphKind>> kGraphKinds = {{"ring", GraphKind::Ring},
                                                                              {"geometric", GraphKind::Geometric}};
const std::initializer_list<std::pair<const char*, MatrixKind>> kMatrixKinds = {
    {"paper-ring", MatrixKind::PaperRing}, {"metropolis", MatrixKind::Metropolis}};
const std::initializer_list<std::pair<const char*, CostKind>> kCostKinds = {
    {"quadratic", CostKind::Quadratic},
    {"exponential", CostKind::Exponential},
    {"classification", CostKind::Classification},
    {"regression", CostKind::Regression}};

template <class E>
std::string enum_name(E value, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"graph.kind", [](auto& c, auto& k, auto& v) { c.graph.kind = to_enum(k, v, kGraphKinds); }},
      {"graph.agents", [](auto& c, auto& k, auto& v) { c.graph.agents = to_int(k, v); }},
      {"graph.radius", [](auto& c, auto& k, auto& v) { c.graph.radius = to_double(k, v); }},
      {"graph.seed", [](auto& c, auto& k, auto& v) { c.graph.seed = to_seed(k, v); }},
      {"graph.matrix", [](auto& c, auto& k, auto& v) { c.graph.matrix = to_enum(k, v, kMatrixKinds); }},

      {"costs.kind", [](auto& c, auto& k, auto& v) { c.costs.kind = to_enum(k, v, kCostKinds); }},
      {"costs.dim", [](auto& c, auto& k, auto& v) { c.costs.dim = to_int(k, v); }},
      {"costs.seed", [](auto& c, auto& k, auto& v) { c.costs.seed = to_seed(k, v); }},
      {"costs.data", [](auto& c, auto&, auto& v) { c.costs.data_path = v; }},
      {"costs.features", [](auto& c, auto&, auto& v) { c.costs.spambase_features = split_list(v); }},
      {"costs.columns",
       [](auto& c, auto& k, auto& v) {
         c.costs.housing_columns.clear();
         for (const auto& s : split_list(v)) c.costs.housing_columns.push_back(to_int(k, s));
       }},
      {"costs.gamma", [](auto& c, auto& k, auto& v) { c.costs.loss.gamma = to_double(k, v); }},
      {"costs.beta", [](auto& c, auto& k, auto& v) { c.costs.loss.beta = to_double(k, v); }},
      {"costs.standardize", [](auto& c, auto& k, auto& v) { c.costs.standardize = to_bool(k, v); }},
      {"costs.partition_seed", [](auto& c, auto& k, auto& v) { c.costs.partition_seed = to_seed(k, v); }},

      {"algorithm.name",
       [](auto& c, auto& k, auto& v) {
         try {
           c.algorithm.algorithm = parse_algorithm(v);
         } catch (const InvalidArgument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"algorithm.scheme",
       [](auto& c, auto& k, auto& v) {
         try {
           c.algorithm.scheme = parse_scheme(v);
         } catch (const InvalidArgument& e) {
           throw ConfigError(k + ": " + e.what());
         }
       }},
      {"algorithm.epsilon", [](auto& c, auto& k, auto& v) { c.algorithm.epsilon = to_double(k, v); }},
      {"algorithm.c", [](auto& c, auto& k, auto& v) { c.algorithm.c = to_double(k, v); }},
      {"algorithm.phi", [](auto& c, auto& k, auto& v) { c.algorithm.phi = to_double(k, v); }},
      {"algorithm.step_scale", [](auto& c, auto& k, auto& v) { c.algorithm.step_scale = to_double(k, v); }},
      {"algorithm.mu", [](auto& c, auto& k, auto& v) { c.algorithm.mu = to_double(k, v); }},
      {"algorithm.nu", [](auto& c, auto& k, auto& v) { c.algorithm.nu = to_double(k, v); }},
      {"algorithm.delta", [](auto& c, auto& k, auto& v) { c.algorithm.delta = to_double(k, v); }},

      {"init.x0_range", [](auto& c, auto& k, auto& v) { c.init.x0_range = to_double(k, v); }},
      {"init.registers_from_x0", [](auto& c, auto& k, auto& v) { c.init.registers_from_x0 = to_bool(k, v); }},
      {"init.sigma", [](auto& c, auto& k, auto& v) { c.init.sigma = to_double(k, v); }},
      {"init.seed", [](auto& c, auto& k, auto& v) { c.init.seed = to_seed(k, v); }},

      {"run.rounds", [](auto& c, auto& k, auto& v) { c.rounds = to_int(k, v); }},
      {"run.record_every", [](auto& c, auto& k, auto& v) { c.record_every = to_int(k, v); }},

      {"sweep.param", [](auto& c, auto&, auto& v) { c.sweep.param = v; }},
      {"sweep.grid", [](auto& c, auto&, auto& v) { c.sweep.grid = v; }},
      {"sweep.probe", [](auto& c, auto& k, auto& v) { c.sweep.probe = to_int(k, v); }},

      {"montecarlo.sigmas",
       [](auto& c, auto& k, auto& v) {
         c.montecarlo.sigmas.clear();
         for (const auto& s : split_list(v)) c.montecarlo.sigmas.push_back(to_double(k, s));
       }},
      {"montecarlo.runs", [](auto& c, auto& k, auto& v) { c.montecarlo.runs = to_int(k, v); }},
      {"montecarlo.max_rounds", [](auto& c, auto& k, auto& v) { c.montecarlo.max_rounds = to_int(k, v); }},

      {"compare.algorithms",
       [](auto& c, auto& k, auto& v) {
         c.compare.algorithms = split_list(v);
         for (const auto& a : c.compare.algorithms) {
           try {
             parse_algorithm(a);
           } catch (const InvalidArgument& e) {
             throw ConfigError(k + ": " + e.what());
           }
         }
       }},
      {"compare.threshold", [](auto& c, auto& k, auto& v) { c.compare.threshold = to_double(k, v); }},

      {"oracle.x",
       [](auto& c, auto& k, auto& v) {
         const auto parts = split_list(v);
         if (parts.empty()) {
           c.oracle.reset();
           return;
         }
         Vec x(static_cast<Eigen::Index>(parts.size()));
         for (std::size_t i = 0; i < parts.size(); ++i) x(static_cast<Eigen::Index>(i)) = to_double(k, parts[i]);
         c.oracle = x;
       }},
  };
  return table;
}

void validate(const ExperimentConfig& c) {
  if (c.rounds < 1) throw ConfigError("run.rounds must be at least 1");
  if (c.record_every < 0) throw ConfigError("run.record_every must be non-negative");
  if (c.graph.agents < 1) throw ConfigError("graph.agents must be positive");
  if (c.costs.dim < 1) throw ConfigError("costs.dim must be positive");
  if (c.sweep.probe < 1) throw ConfigError("sweep.probe must be at least 1");
  if (c.montecarlo.runs < 1) throw ConfigError("montecarlo.runs must be at least 1");
  if (c.montecarlo.max_rounds < 1) throw ConfigError("montecarlo.max_rounds must be at least 1");
  if (c.init.sigma < 0.0) throw ConfigError("init.sigma must be non-negative");
  if (c.compare.algorithms.empty()) throw ConfigError("compare.algorithms must name at least one algorithm");
  if (!(c.compare.threshold > 0.0)) throw ConfigError("compare.threshold must be positive");
  if (c.init.x0_range < 0.0) throw ConfigError("init.x0_range must be non-negative");
}

}  // namespace

KeyMap parse_config_text(std::string_view text, const std::string& origin) {
  KeyMap keys;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw ConfigError(where + ": unterminated array");
      value = join(split_list(value.substr(1, value.size() - 2)));
    } else {
      value = unquote(value);
    }
    keys[section.empty() ? key : section + "." + key] = value;
  }
  return keys;
}

KeyMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw ConfigError(path + ": metadata has no \"config\" object");
    }
    KeyMap keys;
    for (const auto& [k, v] : doc["config"].items()) {
      if (!v.is_string()) throw ConfigError(path + ": config." + k + " must be a string");
      keys[k] = v.get<std::string>();
    }
    return keys;
  }
  return parse_config_text(text, path);
}

void apply_keys(ExperimentConfig& config, const KeyMap& keys) {
  const auto& table = setters();
  for (const auto& [key, value] : keys) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(config, key, value);
  }
  validate(config);
}

ExperimentConfig config_from_keys(const KeyMap& keys) {
  ExperimentConfig config;
  apply_keys(config, keys);
  return config;
}

KeyMap config_to_keys(const ExperimentConfig& c) {
  KeyMap k;
  k["graph.kind"] = enum_name(c.graph.kind, kGraphKinds);
  k["graph.agents"] = std::to_string(c.graph.agents);
  k["graph.radius"] = fmt(c.graph.radius);
  k["graph.seed"] = std::to_string(c.graph.seed);
  k["graph.matrix"] = enum_name(c.graph.matrix, kMatrixKinds);

  k["costs.kind"] = enum_name(c.costs.kind, kCostKinds);
  k["costs.dim"] = std::to_string(c.costs.dim);
  k["costs.seed"] = std::to_string(c.costs.seed);
  k["costs.data"] = c.costs.data_path;
  k["costs.features"] = join(c.costs.spambase_features);
  k["costs.columns"] = join(c.costs.housing_columns);
  k["costs.gamma"] = fmt(c.costs.loss.gamma);
  k["costs.beta"] = fmt(c.costs.loss.beta);
  k["costs.standardize"] = c.costs.standardize ? "true" : "false";
  k["costs.partition_seed"] = std::to_string(c.costs.partition_seed);

  k["algorithm.name"] = std::string(to_string(c.algorithm.algorithm));
  k["algorithm.scheme"] = std::string(to_string(c.algorithm.scheme));
  k["algorithm.epsilon"] = fmt(c.algorithm.epsilon);
  k["algorithm.c"] = fmt(c.algorithm.c);
  k["algorithm.phi"] = fmt(c.algorithm.phi);
  k["algorithm.step_scale"] = fmt(c.algorithm.step_scale);
  k["algorithm.mu"] = fmt(c.algorithm.mu);
  k["algorithm.nu"] = fmt(c.algorithm.nu);
  k["algorithm.delta"] = fmt(c.algorithm.delta);

  k["init.x0_range"] = fmt(c.init.x0_range);
  k["init.registers_from_x0"] = c.init.registers_from_x0 ? "true" : "false";
  k["init.sigma"] = fmt(c.init.sigma);
  k["init.seed"] = std::to_string(c.init.seed);

  k["run.rounds"] = std::to_string(c.rounds);
  k["run.record_every"] = std::to_string(c.record_every);

  k["sweep.param"] = c.sweep.param;
  k["sweep.grid"] = c.sweep.grid;
  k["sweep.probe"] = std::to_string(c.sweep.probe);

  k["montecarlo.sigmas"] = join(c.montecarlo.sigmas);
  k["montecarlo.runs"] = std::to_string(c.montecarlo.runs);
  k["montecarlo.max_rounds"] = std::to_string(c.montecarlo.max_rounds);

  k["compare.algorithms"] = join(c.compare.algorithms);
  k["compare.threshold"] = fmt(c.compare.threshold);

  if (c.oracle) k["oracle.x"] = join(std::vector<double>(c.oracle->data(), c.oracle->data() + c.oracle->size()));
  return k;
}

std::string format_config(const KeyMap& keys) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  for (const auto& [key, value] : keys) {
    const auto dot = key.find('.');
    sections[key.substr(0, dot)].emplace_back(key.substr(dot + 1), value);
  }
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, entries] : sections) {
    if (!first) os << '\n';
    first = false;
    os << '[' << name << "]\n";
    for (const auto& [key, value] : entries) os << key << " = \"" << value << "\"\n";
  }
  return os.str();
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "fig1",           "fig2a", "fig2b", "fig3-classification", "fig3-regression", "fig5-classification",
      "fig5-regression", "quadratic-eps1"};
  return names;
}

KeyMap preset(std::string_view name) {
  const KeyMap ring = {{"graph.kind", "ring"}, {"graph.agents", "30"}, {"graph.matrix", "paper-ring"}};
  const KeyMap geometric = {{"graph.kind", "geometric"},
                            {"graph.agents", "30"},
                            {"graph.radius", "0.3"},
                            {"graph.seed", "1"},
                            {"graph.matrix", "metropolis"}};
  auto merge = [](KeyMap a, const KeyMap& b) {
    for (const auto& [k, v] : b) a[k] = v;
    return a;
  };

  const KeyMap exponential = merge(ring, {{"costs.kind", "exponential"}, {"costs.seed", "1"}});
  const KeyMap fig1 = merge(exponential, {{"algorithm.name", "nrc"},
                                          {"algorithm.epsilon", "0.1"},
                                          {"run.rounds", "2000"},
                                          {"run.record_every", "5"}});
  const KeyMap fig2a = merge(fig1, {{"algorithm.epsilon", "0.01"},
                                    {"init.x0_range", "2"},
                                    {"init.registers_from_x0", "true"},
                                    {"init.seed", "1"},
                                    {"run.rounds", "3000"},
                                    {"run.record_every", "10"}});
  const KeyMap fig2b = merge(fig2a, {{"montecarlo.sigmas", "0,0.001,0.01,0.1"},
                                     {"montecarlo.runs", "300"},
                                     {"montecarlo.max_rounds", "20000"}});
  const KeyMap classification = merge(geometric, {{"costs.kind", "classification"},
                                                  {"costs.data", "spambase_surrogate.data"},
                                                  {"costs.features", "make,address,all"},
                                                  {"costs.gamma", "1"},
                                                  {"costs.partition_seed", "1"}});
  const KeyMap regression = merge(geometric, {{"costs.kind", "regression"},
                                              {"costs.data", "housing.data"},
                                              {"costs.columns", "0,5,8,12"},
                                              {"costs.beta", "50"},
                                              {"costs.gamma", "1"},
                                              {"costs.partition_seed", "1"}});
  const KeyMap fig3 = {{"algorithm.name", "nrc"},
                       {"algorithm.epsilon", "1"},
                       {"sweep.param", "epsilon"},
                       {"sweep.grid", "log:1e-3:1:20"},
                       {"sweep.probe", "40"},
                       {"run.rounds", "200"}};
  const KeyMap fig5 = merge(fig3, {{"run.rounds", "3000"}});

  if (name == "fig1") return fig1;
  if (name == "fig2a") return fig2a;
  if (name == "fig2b") return fig2b;
  if (name == "fig3-classification") return merge(classification, fig3);
  if (name == "fig3-regression") return merge(regression, fig3);
  if (name == "fig5-classification") return merge(classification, fig5);
  if (name == "fig5-regression") return merge(regression, fig5);
  if (name == "quadratic-eps1") {
    return merge(ring, {{"costs.kind", "quadratic"},
                        {"costs.dim", "3"},
                        {"costs.seed", "1"},
                        {"algorithm.name", "nrc"},
                        {"algorithm.epsilon", "1"},
                        {"run.rounds", "200"}});
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace nrc
