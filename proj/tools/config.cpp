#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "hawkes/errors.hpp"

namespace hawkes::cli {

namespace {

std::string at_line(const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return "";
  return "line " + std::to_string(mark.line + 1) + ": ";
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  throw ConfigError(at_line(node) + what);
}

// A mapping node with a fixed set of admissible keys.
class Section {
 public:
  Section(const YAML::Node& node, std::string name,
          std::set<std::string> allowed)
      : node_(node), name_(std::move(name)) {
    if (!node_.IsMap()) fail(node_, name_ + ": expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        fail(kv.first, name_ + ": unknown key '" + key + "'");
      }
    }
  }

  bool has(const std::string& key) const { return bool(node_[key]); }

  YAML::Node get(const std::string& key) const {
    const YAML::Node n = node_[key];
    if (!n) fail(node_, name_ + ": missing required key '" + key + "'");
    return n;
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  template <class T>
  T scalar(const std::string& key) const {
    const YAML::Node n = get(key);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, path(key) + ": expected a scalar of the right type");
    }
  }

  template <class T>
  void optional(const std::string& key, T& out) const {
    if (has(key)) out = scalar<T>(key);
  }

  std::vector<double> numbers(const std::string& key) const {
    const YAML::Node n = get(key);
    if (!n.IsSequence()) fail(n, path(key) + ": expected a list of numbers");
    std::vector<double> out;
    for (const auto& e : n) {
      try {
        out.push_back(e.as<double>());
      } catch (const YAML::Exception&) {
        fail(e, path(key) + ": expected a number");
      }
    }
    return out;
  }

  std::vector<std::vector<double>> rows(const std::string& key) const {
    const YAML::Node n = get(key);
    if (!n.IsSequence()) fail(n, path(key) + ": expected a list of lists");
    std::vector<std::vector<double>> out;
    for (const auto& row : n) {
      if (!row.IsSequence()) fail(row, path(key) + ": expected a list");
      std::vector<double> r;
      for (const auto& e : row) {
        try {
          r.push_back(e.as<double>());
        } catch (const YAML::Exception&) {
          fail(e, path(key) + ": expected a number");
        }
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string name_;
};

void require_non_negative(const YAML::Node& n, const std::string& what,
                          double value) {
  if (!(value >= 0.0)) fail(n, what + " must be non-negative");
}

KernelSpec parse_kernel(const YAML::Node& node, const std::string& name) {
  Section s(node, name, {"family", "params", "c", "m", "scale"});
  KernelSpec k;
  k.family = s.scalar<std::string>("family");
  static const std::set<std::string> families{"exponential", "delayed",
                                              "power_law", "modes", "raw"};
  if (!families.count(k.family)) {
    fail(s.get("family"), s.path("family") + ": unknown family '" + k.family +
                              "' (exponential, delayed, power_law, modes, raw)");
  }
  if (k.family == "raw") {
    k.c = s.numbers("c");
    k.m = s.numbers("m");
  } else {
    k.params = s.numbers("params");
  }
  s.optional("scale", k.scale);
  return k;
}

FactorSpec parse_factor(const YAML::Node& node, const std::string& name) {
  Section s(node, name, {"family", "params", "d", "init"});
  FactorSpec f;
  f.family = s.scalar<std::string>("family");
  if (f.family == "polynomial") {
    f.params.clear();
    f.d = s.rows("d");
    f.init = s.numbers("init");
  } else if (f.family == "constant" || f.family == "cos_squared") {
    f.params = s.numbers("params");
  } else {
    fail(s.get("family"), s.path("family") + ": unknown family '" + f.family +
                              "' (constant, cos_squared, polynomial)");
  }
  return f;
}

MarkSpec parse_marks(const YAML::Node& node, const std::string& name) {
  Section s(node, name, {"family", "params", "values", "probs"});
  MarkSpec m;
  m.family = s.scalar<std::string>("family");
  if (m.family == "discrete") {
    m.params.clear();
    m.values = s.numbers("values");
    m.probs = s.numbers("probs");
  } else if (m.family == "point_mass" || m.family == "uniform" ||
             m.family == "exponential") {
    m.params = s.numbers("params");
  } else {
    fail(s.get("family"),
         s.path("family") + ": unknown family '" + m.family +
             "' (point_mass, uniform, exponential, discrete)");
  }
  return m;
}

RateSpec parse_rate(const YAML::Node& node, const std::string& name) {
  Section s(node, name, {"scale", "factor"});
  RateSpec r;
  r.scale = s.scalar<double>("scale");
  require_non_negative(s.get("scale"), s.path("scale"), r.scale);
  if (s.has("factor")) r.factor = parse_factor(s.get("factor"), s.path("factor"));
  return r;
}

PopulationSpec parse_population(const YAML::Node& node,
                                const std::string& name, bool needs_kernel) {
  Section s(node, name, {"kernel", "init", "factor", "marks"});
  PopulationSpec p;
  if (needs_kernel || s.has("kernel")) {
    p.kernel = parse_kernel(s.get("kernel"), s.path("kernel"));
  }
  s.optional("init", p.init);
  if (p.init != "linear" && p.init != "constant") {
    fail(s.get("init"), s.path("init") + ": expected 'linear' or 'constant'");
  }
  if (s.has("factor")) p.factor = parse_factor(s.get("factor"), s.path("factor"));
  if (s.has("marks")) p.marks = parse_marks(s.get("marks"), s.path("marks"));
  return p;
}

GeneralSpec parse_general(const YAML::Node& node) {
  Section s(node, "model.general",
            {"baseline", "external_rate", "self", "external"});
  GeneralSpec g;
  if (s.has("baseline")) g.baseline = parse_rate(s.get("baseline"), s.path("baseline"));
  if (s.has("external_rate")) {
    g.external_rate = parse_rate(s.get("external_rate"), s.path("external_rate"));
  }
  if (s.has("self")) g.self = parse_population(s.get("self"), s.path("self"), false);
  if (s.has("external")) {
    g.external = parse_population(s.get("external"), s.path("external"), true);
  }
  return g;
}

ModelSpec parse_model(const YAML::Node& node) {
  Section s(node, "model", {"kernel", "mu", "general"});
  ModelSpec m;
  m.kernel = parse_kernel(s.get("kernel"), "model.kernel");
  s.optional("mu", m.mu);
  if (s.has("mu")) require_non_negative(s.get("mu"), "model.mu", m.mu);
  if (s.has("general")) m.general = parse_general(s.get("general"));
  return m;
}

RunSpec parse_run(const YAML::Node& node) {
  Section s(node, "run", {"T", "n_paths", "martingale_paths", "seed",
                          "grid_step", "sample_paths"});
  RunSpec r;
  s.optional("T", r.T);
  s.optional("n_paths", r.n_paths);
  s.optional("martingale_paths", r.martingale_paths);
  s.optional("seed", r.seed);
  s.optional("grid_step", r.grid_step);
  s.optional("sample_paths", r.sample_paths);
  if (!(r.T > 0.0)) fail(s.has("T") ? s.get("T") : node, "run.T must be positive");
  if (!(r.grid_step > 0.0)) {
    fail(s.has("grid_step") ? s.get("grid_step") : node,
         "run.grid_step must be positive");
  }
  return r;
}

QuerySpec parse_query(const YAML::Node& node) {
  Section s(node, "query", {"moments_grid", "laplace", "general_laplace"});
  QuerySpec q;
  if (s.has("moments_grid")) q.moments_grid = s.numbers("moments_grid");
  if (s.has("laplace")) {
    for (const auto& row : s.rows("laplace")) {
      if (row.size() != 2) {
        fail(s.get("laplace"), "query.laplace: entries are [theta1, theta2]");
      }
      q.laplace.push_back({row[0], row[1]});
    }
  }
  if (s.has("general_laplace")) {
    const YAML::Node list = s.get("general_laplace");
    if (!list.IsSequence()) fail(list, "query.general_laplace: expected a list");
    for (const auto& item : list) {
      Section g(item, "query.general_laplace[]", {"u", "v", "count"});
      GeneralQuery gq;
      if (g.has("u")) gq.u = g.rows("u");
      if (g.has("v")) gq.v = g.rows("v");
      g.optional("count", gq.count);
      q.general_laplace.push_back(std::move(gq));
    }
  }
  return q;
}

OutputSpec parse_output(const YAML::Node& node) {
  Section s(node, "output", {"directory", "formats"});
  OutputSpec o;
  s.optional("directory", o.directory);
  if (s.has("formats")) {
    const YAML::Node f = s.get("formats");
    if (!f.IsSequence()) fail(f, "output.formats: expected a list");
    o.formats.clear();
    for (const auto& e : f) {
      const auto name = e.as<std::string>();
      if (name != "csv" && name != "json") {
        fail(e, "output.formats: unknown format '" + name + "' (csv, json)");
      }
      o.formats.push_back(name);
    }
  }
  return o;
}

void emit_numbers(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << x;
  out << YAML::EndSeq;
}

void emit_rows(YAML::Emitter& out, const std::vector<std::vector<double>>& v) {
  out << YAML::BeginSeq;
  for (const auto& r : v) emit_numbers(out, r);
  out << YAML::EndSeq;
}

void emit_kernel(YAML::Emitter& out, const KernelSpec& k) {
  out << YAML::BeginMap << YAML::Key << "family" << YAML::Value << k.family;
  if (k.family == "raw") {
    out << YAML::Key << "c" << YAML::Value;
    emit_numbers(out, k.c);
    out << YAML::Key << "m" << YAML::Value;
    emit_numbers(out, k.m);
  } else {
    out << YAML::Key << "params" << YAML::Value;
    emit_numbers(out, k.params);
  }
  out << YAML::Key << "scale" << YAML::Value << k.scale << YAML::EndMap;
}

void emit_factor(YAML::Emitter& out, const FactorSpec& f) {
  out << YAML::BeginMap << YAML::Key << "family" << YAML::Value << f.family;
  if (f.family == "polynomial") {
    out << YAML::Key << "d" << YAML::Value;
    emit_rows(out, f.d);
    out << YAML::Key << "init" << YAML::Value;
    emit_numbers(out, f.init);
  } else {
    out << YAML::Key << "params" << YAML::Value;
    emit_numbers(out, f.params);
  }
  out << YAML::EndMap;
}

void emit_marks(YAML::Emitter& out, const MarkSpec& m) {
  out << YAML::BeginMap << YAML::Key << "family" << YAML::Value << m.family;
  if (m.family == "discrete") {
    out << YAML::Key << "values" << YAML::Value;
    emit_numbers(out, m.values);
    out << YAML::Key << "probs" << YAML::Value;
    emit_numbers(out, m.probs);
  } else {
    out << YAML::Key << "params" << YAML::Value;
    emit_numbers(out, m.params);
  }
  out << YAML::EndMap;
}

void emit_rate(YAML::Emitter& out, const RateSpec& r) {
  out << YAML::BeginMap << YAML::Key << "scale" << YAML::Value << r.scale
      << YAML::Key << "factor" << YAML::Value;
  emit_factor(out, r.factor);
  out << YAML::EndMap;
}

void emit_population(YAML::Emitter& out, const PopulationSpec& p) {
  out << YAML::BeginMap;
  if (p.kernel) {
    out << YAML::Key << "kernel" << YAML::Value;
    emit_kernel(out, *p.kernel);
  }
  out << YAML::Key << "init" << YAML::Value << p.init << YAML::Key << "factor"
      << YAML::Value;
  emit_factor(out, p.factor);
  out << YAML::Key << "marks" << YAML::Value;
  emit_marks(out, p.marks);
  out << YAML::EndMap;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError("line 1: empty config");
  Section top(root, "config", {"model", "run", "query", "output"});
  ExperimentConfig c;
  if (!top.has("model")) fail(root, "missing required section 'model'");
  c.model = parse_model(top.get("model"));
  if (top.has("run")) c.run = parse_run(top.get("run"));
  if (top.has("query")) c.query = parse_query(top.get("query"));
  if (top.has("output")) c.output = parse_output(top.get("output"));
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kernel" << YAML::Value;
  emit_kernel(out, c.model.kernel);
  out << YAML::Key << "mu" << YAML::Value << c.model.mu;
  if (c.model.general) {
    const GeneralSpec& g = *c.model.general;
    out << YAML::Key << "general" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "baseline" << YAML::Value;
    emit_rate(out, g.baseline);
    out << YAML::Key << "external_rate" << YAML::Value;
    emit_rate(out, g.external_rate);
    out << YAML::Key << "self" << YAML::Value;
    emit_population(out, g.self);
    if (g.external) {
      out << YAML::Key << "external" << YAML::Value;
      emit_population(out, *g.external);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "T" << YAML::Value << c.run.T;
  out << YAML::Key << "n_paths" << YAML::Value << c.run.n_paths;
  out << YAML::Key << "martingale_paths" << YAML::Value << c.run.martingale_paths;
  out << YAML::Key << "seed" << YAML::Value << c.run.seed;
  out << YAML::Key << "grid_step" << YAML::Value << c.run.grid_step;
  out << YAML::Key << "sample_paths" << YAML::Value << c.run.sample_paths;
  out << YAML::EndMap;

  out << YAML::Key << "query" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "moments_grid" << YAML::Value;
  emit_numbers(out, c.query.moments_grid);
  out << YAML::Key << "laplace" << YAML::Value << YAML::BeginSeq;
  for (const auto& th : c.query.laplace) emit_numbers(out, {th[0], th[1]});
  out << YAML::EndSeq;
  out << YAML::Key << "general_laplace" << YAML::Value << YAML::BeginSeq;
  for (const auto& g : c.query.general_laplace) {
    out << YAML::BeginMap;
    out << YAML::Key << "u" << YAML::Value;
    emit_rows(out, g.u);
    out << YAML::Key << "v" << YAML::Value;
    emit_rows(out, g.v);
    out << YAML::Key << "count" << YAML::Value << g.count;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << c.output.directory;
  out << YAML::Key << "formats" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& f : c.output.formats) out << f;
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

namespace {

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void need_params(const KernelSpec& k, std::size_t n, const char* names) {
  if (k.params.size() != n) {
    throw ConfigError("kernel family '" + k.family + "' takes params " + names);
  }
}

}  // namespace

OdeKernel build_kernel(const KernelSpec& k) {
  if (!(k.scale >= 0.0)) throw ConfigError("kernel scale must be non-negative");
  Vector c;
  Vector m;
  if (k.family == "exponential") {
    need_params(k, 1, "[rate]");
    const OdeKernel base = exponential_kernel(k.params[0]);
    c = base.coefficients();
    m = base.initial_stack();
  } else if (k.family == "delayed") {
    need_params(k, 2, "[alpha, beta]");
    const OdeKernel base = delayed_kernel(k.params[0], k.params[1]);
    c = base.coefficients();
    m = base.initial_stack();
  } else if (k.family == "power_law") {
    need_params(k, 4, "[tau0, ratio, exponent, terms]");
    PowerLawParams p{k.params[0], k.params[1], k.params[2],
                     static_cast<int>(k.params[3])};
    if (static_cast<double>(p.terms) != k.params[3]) {
      throw ConfigError("power_law: terms must be an integer");
    }
    const OdeKernel base = power_law_kernel(p);
    c = base.coefficients();
    m = base.initial_stack();
  } else if (k.family == "modes") {
    if (k.params.empty() || k.params.size() % 2) {
      throw ConfigError(
          "kernel family 'modes' takes params [w_1, ..., w_K, r_1, ..., r_K]");
    }
    const auto K = static_cast<Eigen::Index>(k.params.size() / 2);
    const Vector all = to_vector(k.params);
    const OdeKernel base =
        kernel_from_exponential_modes(all.head(K), all.tail(K));
    c = base.coefficients();
    m = base.initial_stack();
  } else if (k.family == "raw") {
    c = to_vector(k.c);
    m = to_vector(k.m);
  } else {
    throw ConfigError("unknown kernel family '" + k.family + "'");
  }
  return build_ode_kernel(c, k.scale * m);
}

TimeFactor build_factor(const FactorSpec& f, double horizon) {
  if (f.family == "constant") {
    if (f.params.size() != 1) throw ConfigError("constant factor takes [value]");
    return TimeFactor::constant(f.params[0]);
  }
  if (f.family == "cos_squared") {
    if (f.params.empty() || f.params.size() > 2) {
      throw ConfigError("cos_squared factor takes [alpha] or [alpha, scale]");
    }
    return TimeFactor::cos_squared(f.params[0],
                                   f.params.size() == 2 ? f.params[1] : 1.0);
  }
  if (f.family == "polynomial") {
    return TimeFactor::polynomial_coefficient(f.d, to_vector(f.init), horizon);
  }
  throw ConfigError("unknown factor family '" + f.family + "'");
}

MarkDistribution build_marks(const MarkSpec& m) {
  auto need = [&](std::size_t n, const char* names) {
    if (m.params.size() != n) {
      throw ConfigError("mark family '" + m.family + "' takes params " + names);
    }
  };
  if (m.family == "point_mass") {
    need(1, "[x]");
    return MarkDistribution::point_mass(m.params[0]);
  }
  if (m.family == "uniform") {
    need(2, "[lo, hi]");
    return MarkDistribution::uniform(m.params[0], m.params[1]);
  }
  if (m.family == "exponential") {
    need(1, "[rate]");
    return MarkDistribution::exponential(m.params[0]);
  }
  if (m.family == "discrete") {
    return MarkDistribution::discrete(m.values, m.probs);
  }
  throw ConfigError("unknown mark family '" + m.family + "'");
}

namespace {

MarkKernel build_population(const PopulationSpec& p, const KernelSpec& fallback,
                            double horizon) {
  MarkKernel k;
  k.base = build_kernel(p.kernel ? *p.kernel : fallback);
  k.init_family = p.init == "linear" ? MarkKernel::InitFamily::Linear
                                     : MarkKernel::InitFamily::Constant;
  k.time_factor = build_factor(p.factor, horizon);
  k.marks = build_marks(p.marks);
  return k;
}

}  // namespace

GeneralModel build_general_model(const ExperimentConfig& c) {
  const double T = c.run.T;
  if (!c.model.general) return standard_as_general(build_kernel(c.model.kernel), c.model.mu);
  const GeneralSpec& g = *c.model.general;
  GeneralModel gm;
  gm.id = "general";
  gm.baseline = {g.baseline.scale, build_factor(g.baseline.factor, T)};
  gm.external_rate = {g.external_rate.scale, build_factor(g.external_rate.factor, T)};
  gm.self = build_population(g.self, c.model.kernel, T);
  if (g.external) {
    gm.external = build_population(*g.external, c.model.kernel, T);
  }
  validate_general_model(gm, T);
  return gm;
}

}  // namespace hawkes::cli
