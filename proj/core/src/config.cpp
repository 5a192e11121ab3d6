#include "qsteady/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "qsteady/errors.hpp"

namespace qsteady {

namespace {

using json = nlohmann::json;

const std::vector<std::string> kKindNames = {
    "steady_state",     "gibbs_decay",     "oracle_check",  "perturb_sweep",
    "covariance_decay", "connected_probe", "validate_model",
};

json scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  if (node.Tag() == "!") return s;  // quoted
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  std::int64_t i = 0;
  auto [pi, ei] = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ei == std::errc() && pi == s.data() + s.size()) return i;
  double d = 0.0;
  auto [pd, ed] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ed == std::errc() && pd == s.data() + s.size()) return d;
  return s;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

// Collects schema violations so they can be reported together.
class Validator {
 public:
  void fail(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }
  bool ok() const { return errors_.empty(); }

  [[noreturn]] void raise() const {
    std::ostringstream os;
    os << "config has " << errors_.size() << " error(s):";
    for (const auto& e : errors_) os << "\n  " << e;
    throw ConfigError(os.str());
  }

  void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown key");
    }
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj[key];
    if (!v.is_number()) {
      fail(join(path, key), "expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::int64_t> integer(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj[key];
    if (!v.is_number_integer()) {
      fail(join(path, key), "expected an integer");
      return std::nullopt;
    }
    return v.get<std::int64_t>();
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj[key];
    if (!v.is_string()) {
      fail(join(path, key), "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::vector<std::string> errors_;
};

std::string format_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

std::optional<int> parse_pauli_letter(const json& v) {
  if (v.is_number_integer()) {
    const int l = v.get<int>();
    if (l >= 1 && l <= 3) return l;
    return std::nullopt;
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "X" || s == "x") return 1;
    if (s == "Y" || s == "y") return 2;
    if (s == "Z" || s == "z") return 3;
  }
  return std::nullopt;
}

std::optional<Edge> parse_edge(const json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    return std::nullopt;
  }
  return Edge(v[0].get<int>(), v[1].get<int>());
}

void parse_graph(const json& g, GraphSpec& spec, Validator& val) {
  const std::string path = "model.graph";
  if (!g.is_object()) {
    val.fail(path, "expected a mapping with 'ring', 'chain' or 'n' + 'edges'");
    return;
  }
  val.check_keys(g, path, {"ring", "chain", "n", "edges"});
  if (g.contains("ring")) {
    spec.type = GraphSpec::Type::ring;
    auto n = val.integer(g, "ring", path);
    if (n && *n < 3) val.fail(path + ".ring", "a ring needs n >= 3");
    spec.n = n ? static_cast<int>(*n) : 0;
  } else if (g.contains("chain")) {
    spec.type = GraphSpec::Type::chain;
    auto n = val.integer(g, "chain", path);
    if (n && *n < 2) val.fail(path + ".chain", "a chain needs n >= 2");
    spec.n = n ? static_cast<int>(*n) : 0;
  } else if (g.contains("n") && g.contains("edges")) {
    spec.type = GraphSpec::Type::edges;
    auto n = val.integer(g, "n", path);
    spec.n = n ? static_cast<int>(*n) : 0;
    const json& edges = g["edges"];
    if (!edges.is_array() || edges.empty()) {
      val.fail(path + ".edges", "expected a nonempty list of [u, v] or [u, v, weight]");
      return;
    }
    bool weighted = false, unweighted = false;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const json& e = edges[i];
      const std::string ep = path + ".edges[" + std::to_string(i) + "]";
      if (!e.is_array() || (e.size() != 2 && e.size() != 3) || !e[0].is_number_integer() ||
          !e[1].is_number_integer() || (e.size() == 3 && !e[2].is_number())) {
        val.fail(ep, "expected [u, v] or [u, v, weight]");
        continue;
      }
      (e.size() == 3 ? weighted : unweighted) = true;
      spec.edges.push_back({Edge(e[0].get<int>(), e[1].get<int>()), e.size() == 3 ? e[2].get<double>() : 0.0});
    }
    if (weighted && unweighted) val.fail(path + ".edges", "give weights for all edges or for none");
    if (unweighted) {
      for (auto& we : spec.edges) we.weight = 1.0 / static_cast<double>(spec.edges.size());
    }
  } else {
    val.fail(path, "expected 'ring', 'chain' or 'n' + 'edges'");
  }
  if (spec.n > 20) val.fail(path, "at most 20 qubits are supported");
}

void parse_dissipators(const json& d, DissipatorSpec& spec, int n, Validator& val) {
  const std::string path = "model.dissipators";
  if (!d.is_object()) {
    val.fail(path, "expected a mapping with a 'type'");
    return;
  }
  const auto type = val.string(d, "type", path).value_or("random");
  if (type == "random") {
    spec.type = DissipatorSpec::Type::random;
    val.check_keys(d, path, {"type", "min_bloch", "max_bloch"});
    spec.min_bloch = val.number(d, "min_bloch", path).value_or(spec.min_bloch);
    spec.max_bloch = val.number(d, "max_bloch", path).value_or(spec.max_bloch);
    if (!(spec.min_bloch >= 0.0 && spec.min_bloch <= spec.max_bloch && spec.max_bloch < 1.0)) {
      val.fail(path, "need 0 <= min_bloch <= max_bloch < 1");
    }
  } else if (type == "bloch") {
    spec.type = DissipatorSpec::Type::bloch;
    val.check_keys(d, path, {"type", "vectors"});
    const json& vs = d.contains("vectors") ? d["vectors"] : json();
    if (!vs.is_array() || vs.empty()) {
      val.fail(path + ".vectors", "expected a list of [x, y, z]");
      return;
    }
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const json& v = vs[i];
      const std::string vp = path + ".vectors[" + std::to_string(i) + "]";
      if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
        val.fail(vp, "expected [x, y, z]");
        continue;
      }
      std::array<double, 3> b{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
      if (std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]) >= 1.0) {
        val.fail(vp, "Bloch vector must have length < 1 (full-rank reset state)");
      }
      spec.bloch.push_back(b);
    }
    if (spec.bloch.size() != 1 && static_cast<int>(spec.bloch.size()) != n) {
      val.fail(path + ".vectors", "give one vector for all sites or one per site");
    }
  } else if (type == "eigenvalues") {
    spec.type = DissipatorSpec::Type::eigenvalues;
    val.check_keys(d, path, {"type", "values"});
    const json& v = d.contains("values") ? d["values"] : json();
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      val.fail(path + ".values", "expected [w0, w1]");
      return;
    }
    spec.eigenvalues = {v[0].get<double>(), v[1].get<double>()};
    if (!(spec.eigenvalues[0] > 0.0 && spec.eigenvalues[1] > 0.0 &&
          std::abs(spec.eigenvalues[0] + spec.eigenvalues[1] - 1.0) <= 1e-12)) {
      val.fail(path + ".values", "eigenvalues must be positive and sum to 1");
    }
  } else if (type == "plus") {
    spec.type = DissipatorSpec::Type::plus;
    val.check_keys(d, path, {"type"});
  } else {
    val.fail(path + ".type", "unknown dissipator type '" + type + "' (allowed: random, bloch, eigenvalues, plus)");
  }
}

void parse_correlator(const json& c, CorrelatorSpec& spec, Validator& val) {
  const std::string path = "model.correlator";
  const std::string allowed = "allowed kinds: cz, haar_mixture, random_kraus";
  if (!c.is_object()) {
    val.fail(path, "missing correlator mapping; " + allowed);
    return;
  }
  val.check_keys(c, path, {"kind", "rank", "k"});
  const auto kind = val.string(c, "kind", path);
  if (!kind) {
    val.fail(path + ".kind", "missing correlator kind; " + allowed);
    return;
  }
  const auto parsed = parse_correlator_kind(*kind);
  if (!parsed) {
    val.fail(path + ".kind", "unknown correlator kind '" + *kind + "'; " + allowed);
    return;
  }
  spec.kind = *parsed;
  switch (spec.kind) {
    case CorrelatorKind::cz:
      spec.param = 1;
      break;
    case CorrelatorKind::haar_mixture:
      spec.param = static_cast<int>(val.integer(c, "k", path).value_or(1));
      if (spec.param < 1) val.fail(path + ".k", "must be >= 1");
      break;
    case CorrelatorKind::random_kraus:
      spec.param = static_cast<int>(val.integer(c, "rank", path).value_or(3));
      if (spec.param < 1) val.fail(path + ".rank", "must be >= 1");
      break;
  }
}

ExperimentConfig from_json(const json& root, std::optional<ExperimentKind> forced) {
  Validator val;
  ExperimentConfig cfg;
  if (!root.is_object()) {
    val.fail("<root>", "expected a mapping");
    val.raise();
  }
  val.check_keys(root, "", {"kind", "model", "epsilons", "seeds", "tol", "max_iter", "log_floor", "prune",
                            "workers", "output", "k_cap", "k_max", "max_terms", "observables", "distances",
                            "edge_pairs", "h_step", "oracle"});

  if (auto kind = val.string(root, "kind", "")) {
    if (auto k = parse_experiment_kind(*kind)) {
      cfg.kind = *k;
      if (forced && *forced != *k) {
        val.fail("kind", "config is for '" + *kind + "' but '" + to_string(*forced) + "' was requested");
      }
    } else {
      val.fail("kind", "unknown experiment kind '" + *kind + "' (allowed: " + join_names(kKindNames) + ")");
    }
  } else if (forced) {
    cfg.kind = *forced;
  } else {
    val.fail("kind", "missing experiment kind (allowed: " + join_names(kKindNames) + ")");
  }

  if (!root.contains("model") || !root["model"].is_object()) {
    val.fail("model", "missing model mapping");
  } else {
    const json& m = root["model"];
    val.check_keys(m, "model", {"id", "graph", "dissipators", "correlator"});
    if (m.contains("graph")) {
      parse_graph(m["graph"], cfg.model.graph, val);
    } else {
      val.fail("model.graph", "missing graph");
    }
    if (m.contains("dissipators")) parse_dissipators(m["dissipators"], cfg.model.dissipators, cfg.model.graph.n, val);
    parse_correlator(m.contains("correlator") ? m["correlator"] : json(), cfg.model.correlator, val);
    cfg.model.id = val.string(m, "id", "model").value_or("");
  }

  if (root.contains("epsilons")) {
    const json& e = root["epsilons"];
    if (!e.is_array() || e.empty()) {
      val.fail("epsilons", "expected a nonempty list");
    } else {
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (!e[i].is_number()) {
          val.fail("epsilons[" + std::to_string(i) + "]", "expected a number");
          continue;
        }
        const double x = e[i].get<double>();
        if (!(x >= 0.0 && x <= 1.0)) {
          val.fail("epsilons[" + std::to_string(i) + "]", "epsilon " + format_number(x) + " outside [0, 1]");
        }
        cfg.epsilons.push_back(x);
      }
    }
  } else {
    cfg.epsilons = default_epsilon_grid();
  }

  if (root.contains("seeds")) {
    const json& s = root["seeds"];
    if (!s.is_array() || s.empty()) {
      val.fail("seeds", "expected a nonempty list of nonnegative integers");
    } else {
      cfg.seeds.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_number_integer() || s[i].get<std::int64_t>() < 0) {
          val.fail("seeds[" + std::to_string(i) + "]", "expected a nonnegative integer");
          continue;
        }
        cfg.seeds.push_back(s[i].get<std::uint64_t>());
      }
    }
  }

  cfg.tol = val.number(root, "tol", "").value_or(cfg.tol);
  if (!(cfg.tol > 0.0)) val.fail("tol", "must be positive");
  cfg.max_iter = static_cast<int>(val.integer(root, "max_iter", "").value_or(cfg.max_iter));
  if (cfg.max_iter < 1) val.fail("max_iter", "must be >= 1");
  cfg.log_floor = val.number(root, "log_floor", "").value_or(cfg.log_floor);
  if (!(cfg.log_floor > 0.0)) val.fail("log_floor", "must be positive");
  cfg.prune = val.number(root, "prune", "").value_or(cfg.prune);
  if (!(cfg.prune >= 0.0)) val.fail("prune", "must be nonnegative");
  cfg.workers = static_cast<int>(val.integer(root, "workers", "").value_or(cfg.workers));
  if (cfg.workers < 1) val.fail("workers", "must be >= 1");
  cfg.output_dir = val.string(root, "output", "").value_or(cfg.output_dir);
  cfg.k_cap = static_cast<int>(val.integer(root, "k_cap", "").value_or(cfg.k_cap));
  cfg.k_max = static_cast<int>(val.integer(root, "k_max", "").value_or(cfg.k_max));
  if (cfg.k_max < 0) val.fail("k_max", "must be >= 0");
  const auto max_terms = val.integer(root, "max_terms", "").value_or(static_cast<std::int64_t>(cfg.max_terms));
  if (max_terms < 1) val.fail("max_terms", "must be >= 1");
  cfg.max_terms = static_cast<std::size_t>(std::max<std::int64_t>(1, max_terms));
  cfg.h_step = val.number(root, "h_step", "").value_or(cfg.h_step);
  if (!(cfg.h_step > 0.0 && cfg.h_step <= 1.0)) val.fail("h_step", "must lie in (0, 1]");
  if (root.contains("oracle")) {
    if (root["oracle"].is_boolean()) {
      cfg.oracle = root["oracle"].get<bool>();
    } else {
      val.fail("oracle", "expected true or false");
    }
  }

  const int n = cfg.model.graph.n;
  if (root.contains("observables")) {
    const json& obs = root["observables"];
    cfg.observables.clear();
    if (!obs.is_array() || obs.empty()) val.fail("observables", "expected a nonempty list of {site, pauli}");
    for (std::size_t i = 0; obs.is_array() && i < obs.size(); ++i) {
      const std::string op = "observables[" + std::to_string(i) + "]";
      const json& o = obs[i];
      if (!o.is_object() || !o.contains("site") || !o["site"].is_number_integer()) {
        val.fail(op, "expected {site: int, pauli: X|Y|Z}");
        continue;
      }
      val.check_keys(o, op, {"site", "pauli"});
      ObservableSpec spec;
      spec.site = o["site"].get<int>();
      if (spec.site < 0 || spec.site >= n) val.fail(op + ".site", "outside [0, n)");
      if (o.contains("pauli")) {
        auto l = parse_pauli_letter(o["pauli"]);
        if (!l) val.fail(op + ".pauli", "expected X, Y or Z");
        spec.pauli = l.value_or(3);
      }
      cfg.observables.push_back(spec);
    }
  }
  if (root.contains("distances")) {
    const json& d = root["distances"];
    cfg.distances.clear();
    if (!d.is_array() || d.empty()) val.fail("distances", "expected a nonempty list of positive integers");
    for (std::size_t i = 0; d.is_array() && i < d.size(); ++i) {
      if (!d[i].is_number_integer() || d[i].get<int>() < 1) {
        val.fail("distances[" + std::to_string(i) + "]", "expected a positive integer");
        continue;
      }
      cfg.distances.push_back(d[i].get<int>());
    }
  }
  if (root.contains("edge_pairs")) {
    const json& p = root["edge_pairs"];
    if (!p.is_array() || p.empty()) val.fail("edge_pairs", "expected a list of [[u, v], [x, y]]");
    for (std::size_t i = 0; p.is_array() && i < p.size(); ++i) {
      const std::string pp = "edge_pairs[" + std::to_string(i) + "]";
      if (!p[i].is_array() || p[i].size() != 2) {
        val.fail(pp, "expected [[u, v], [x, y]]");
        continue;
      }
      auto e1 = parse_edge(p[i][0]);
      auto e2 = parse_edge(p[i][1]);
      if (!e1 || !e2) {
        val.fail(pp, "expected [[u, v], [x, y]]");
        continue;
      }
      if (*e1 == *e2) val.fail(pp, "edges must differ");
      cfg.edge_pairs.push_back({*e1, *e2});
    }
  }

  if (!val.ok()) val.raise();

  // Cross-field checks that need a well-formed graph.
  try {
    const InteractionGraph g = build_graph(cfg.model.graph);
    for (std::size_t i = 0; i < cfg.edge_pairs.size(); ++i) {
      for (const Edge& e : cfg.edge_pairs[i]) {
        if (!g.edge_index(e.a, e.b)) {
          val.fail("edge_pairs[" + std::to_string(i) + "]",
                   "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") is not in the graph");
        }
      }
    }
  } catch (const Error& e) {
    val.fail("model.graph", e.what());
  }
  if (cfg.model.id.empty()) cfg.model.id = default_model_id(cfg.model);
  if (!val.ok()) val.raise();
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json graph_json(const GraphSpec& g) {
  switch (g.type) {
    case GraphSpec::Type::ring: return {{"ring", g.n}};
    case GraphSpec::Type::chain: return {{"chain", g.n}};
    case GraphSpec::Type::edges: {
      json edges = json::array();
      for (const auto& we : g.edges) edges.push_back({we.edge.a, we.edge.b, we.weight});
      return {{"n", g.n}, {"edges", edges}};
    }
  }
  return nullptr;
}

json dissipator_json(const DissipatorSpec& d) {
  switch (d.type) {
    case DissipatorSpec::Type::random:
      return {{"type", "random"}, {"min_bloch", d.min_bloch}, {"max_bloch", d.max_bloch}};
    case DissipatorSpec::Type::bloch: {
      json vs = json::array();
      for (const auto& b : d.bloch) vs.push_back({b[0], b[1], b[2]});
      return {{"type", "bloch"}, {"vectors", vs}};
    }
    case DissipatorSpec::Type::eigenvalues:
      return {{"type", "eigenvalues"}, {"values", {d.eigenvalues[0], d.eigenvalues[1]}}};
    case DissipatorSpec::Type::plus:
      return {{"type", "plus"}};
  }
  return nullptr;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ExperimentKind>(i);
  }
  return std::nullopt;
}

const std::vector<std::string>& experiment_kind_names() { return kKindNames; }

std::vector<double> default_epsilon_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

ExperimentConfig parse_config(const std::string& text, bool is_json, std::optional<ExperimentKind> kind) {
  json root;
  if (is_json) {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      const std::size_t upto = std::min(text.size(), static_cast<std::size_t>(e.byte));
      const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
      throw ConfigError("JSON parse error at line " + std::to_string(line) + ": " + e.what());
    }
  } else {
    try {
      root = yaml_to_json(YAML::Load(text));
    } catch (const YAML::ParserException& e) {
      throw ConfigError("YAML parse error at line " + std::to_string(e.mark.line + 1) + ", column " +
                        std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
  }
  return from_json(root, kind);
}

ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> kind) {
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return parse_config(read_file(path), is_json, kind);
}

std::string canonical_json(const ExperimentConfig& cfg) {
  json obs = json::array();
  for (const auto& o : cfg.observables) obs.push_back({{"site", o.site}, {"pauli", o.pauli}});
  json pairs = json::array();
  for (const auto& p : cfg.edge_pairs) pairs.push_back({{p[0].a, p[0].b}, {p[1].a, p[1].b}});
  json j = {
      {"kind", to_string(cfg.kind)},
      {"model",
       {{"id", cfg.model.id},
        {"graph", graph_json(cfg.model.graph)},
        {"dissipators", dissipator_json(cfg.model.dissipators)},
        {"correlator", {{"kind", to_string(cfg.model.correlator.kind)}, {"param", cfg.model.correlator.param}}}}},
      {"epsilons", cfg.epsilons},
      {"seeds", cfg.seeds},
      {"tol", cfg.tol},
      {"max_iter", cfg.max_iter},
      {"log_floor", cfg.log_floor},
      {"prune", cfg.prune},
      {"k_cap", cfg.k_cap},
      {"k_max", cfg.k_max},
      {"max_terms", cfg.max_terms},
      {"observables", obs},
      {"distances", cfg.distances},
      {"edge_pairs", pairs},
      {"h_step", cfg.h_step},
      {"oracle", cfg.oracle},
  };
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

InteractionGraph build_graph(const GraphSpec& spec) {
  switch (spec.type) {
    case GraphSpec::Type::ring: return build_ring(spec.n);
    case GraphSpec::Type::chain: return build_chain(spec.n);
    case GraphSpec::Type::edges: return InteractionGraph::from_edges(spec.n, spec.edges);
  }
  throw ConfigError("unknown graph type");
}

ChannelModel build_model(const ModelSpec& spec, std::uint64_t seed, double epsilon) {
  InteractionGraph graph = build_graph(spec.graph);
  const int n = graph.num_vertices();
  const auto& d = spec.dissipators;
  if (d.type == DissipatorSpec::Type::random) {
    RandomModelOptions opts;
    opts.correlator = spec.correlator;
    opts.min_bloch = d.min_bloch;
    opts.max_bloch = d.max_bloch;
    return make_random_model(std::move(graph), opts, seed, epsilon);
  }
  std::vector<Matrix> states;
  for (int i = 0; i < n; ++i) {
    switch (d.type) {
      case DissipatorSpec::Type::bloch: {
        const auto& b = d.bloch.size() == 1 ? d.bloch[0] : d.bloch[static_cast<std::size_t>(i)];
        states.push_back(bloch_state(b[0], b[1], b[2]));
        break;
      }
      case DissipatorSpec::Type::eigenvalues: {
        Matrix w = Matrix::Zero(2, 2);
        w(0, 0) = d.eigenvalues[0];
        w(1, 1) = d.eigenvalues[1];
        states.push_back(w);
        break;
      }
      case DissipatorSpec::Type::plus:
        states.push_back(bloch_state(0.8, 0.0, 0.0));
        break;
      case DissipatorSpec::Type::random:
        break;
    }
  }
  std::vector<KrausChannel> correlators;
  for (std::size_t k = 0; k < graph.num_edges(); ++k) {
    correlators.push_back(make_correlator(spec.correlator, derive_seed(seed, 0xC0, k), graph.edge(k)));
  }
  return make_model(std::move(graph), states, std::move(correlators), epsilon);
}

std::string default_model_id(const ModelSpec& spec) {
  std::string id = to_string(spec.correlator.kind);
  if (spec.correlator.kind != CorrelatorKind::cz) id += std::to_string(spec.correlator.param);
  switch (spec.graph.type) {
    case GraphSpec::Type::ring: id += "-ring" + std::to_string(spec.graph.n); break;
    case GraphSpec::Type::chain: id += "-chain" + std::to_string(spec.graph.n); break;
    case GraphSpec::Type::edges: id += "-graph" + std::to_string(spec.graph.n); break;
  }
  switch (spec.dissipators.type) {
    case DissipatorSpec::Type::random: id += "-random"; break;
    case DissipatorSpec::Type::bloch: id += "-bloch"; break;
    case DissipatorSpec::Type::eigenvalues: id += "-diag"; break;
    case DissipatorSpec::Type::plus: id += "-plus"; break;
  }
  return id;
}

}  // namespace qsteady
