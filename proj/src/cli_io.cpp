#include "bidomain/cli_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "bidomain/errors.hpp"

namespace bidomain {

namespace {

struct Value {
  enum class Kind { Int, Float, Bool, String, Array } kind = Kind::Int;
  std::string text;  // raw token for numbers, content for strings
  double number = 0.0;
  bool flag = false;
  std::vector<Value> items;
};

std::string kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::Int: return "integer";
    case Value::Kind::Float: return "float";
    case Value::Kind::Bool: return "boolean";
    case Value::Kind::String: return "string";
    case Value::Kind::Array: return "array";
  }
  return "value";
}

class ValueParser {
 public:
  ValueParser(const std::string& s, const std::string& key) : s_(s), key_(key) {}

  Value parse_all() {
    Value v = parse();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const { throw ConfigError(key_ + ": " + why); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  Value parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  Value parse_string() {
    Value v;
    v.kind = Value::Kind::String;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\') {
        if (++pos_ >= s_.size()) break;
        const char e = s_[pos_];
        if (e == 'n') v.text += '\n';
        else if (e == 't') v.text += '\t';
        else if (e == '"' || e == '\\') v.text += e;
        else fail("unsupported escape in string");
      } else {
        v.text += s_[pos_];
      }
      ++pos_;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }

  Value parse_array() {
    Value v;
    v.kind = Value::Kind::Array;
    ++pos_;
    for (;;) {
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      v.items.push_back(parse());
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ',') ++pos_;
      else if (pos_ < s_.size() && s_[pos_] != ']') fail("expected ',' or ']' in array");
    }
  }

  Value parse_scalar() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    const std::string tok = s_.substr(start, pos_ - start);
    Value v;
    v.text = tok;
    if (tok == "true" || tok == "false") {
      v.kind = Value::Kind::Bool;
      v.flag = tok == "true";
      return v;
    }
    const bool integral = !tok.empty() &&
                          tok.find_first_not_of("+-0123456789") == std::string::npos &&
                          tok.find_first_of("0123456789") != std::string::npos;
    const char* first = tok.data() + (tok.size() > 1 && tok[0] == '+' ? 1 : 0);
    const auto [end, ec] = std::from_chars(first, tok.data() + tok.size(), v.number);
    if (ec != std::errc() || end != tok.data() + tok.size())
      fail("cannot parse value '" + tok + "'");
    v.kind = integral ? Value::Kind::Int : Value::Kind::Float;
    return v;
  }

  const std::string& s_;
  std::string key_;
  std::size_t pos_ = 0;
};

using Setter = std::function<void(const Value&, const std::string&)>;

[[noreturn]] void type_error(const std::string& key, const std::string& want, const Value& v) {
  throw ConfigError(key + ": expected " + want + ", got " + kind_name(v.kind));
}

double as_number(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::Int && v.kind != Value::Kind::Float) type_error(key, "a number", v);
  return v.number;
}

long long as_integer(const Value& v, const std::string& key) {
  if (v.kind != Value::Kind::Int) type_error(key, "an integer", v);
  long long out = 0;
  const char* first = v.text.data() + (v.text[0] == '+' ? 1 : 0);
  const auto [end, ec] = std::from_chars(first, v.text.data() + v.text.size(), out);
  if (ec != std::errc() || end != v.text.data() + v.text.size())
    throw ConfigError(key + ": integer out of range");
  return out;
}

Setter number(double& target) {
  return [&target](const Value& v, const std::string& key) { target = as_number(v, key); };
}

Setter integer(int& target) {
  return [&target](const Value& v, const std::string& key) {
    const long long x = as_integer(v, key);
    if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key + ": integer out of range");
    target = int(x);
  };
}

Setter unsigned64(std::uint64_t& target) {
  return [&target](const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::Int) type_error(key, "a non-negative integer", v);
    const char* first = v.text.data() + (v.text[0] == '+' ? 1 : 0);
    const auto [end, ec] = std::from_chars(first, v.text.data() + v.text.size(), target);
    if (ec != std::errc() || end != v.text.data() + v.text.size())
      throw ConfigError(key + ": expected a non-negative 64-bit integer");
  };
}

Setter boolean(bool& target) {
  return [&target](const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::Bool) type_error(key, "a boolean", v);
    target = v.flag;
  };
}

Setter string(std::string& target) {
  return [&target](const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::String) type_error(key, "a string", v);
    target = v.text;
  };
}

Setter number_list(std::vector<double>& target) {
  return [&target](const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::Array) type_error(key, "an array of numbers", v);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.items.size(); ++i)
      out.push_back(as_number(v.items[i], key + "[" + std::to_string(i) + "]"));
    target = std::move(out);
  };
}

Setter box_list(std::vector<CellBox>& target) {
  return [&target](const Value& v, const std::string& key) {
    if (v.kind != Value::Kind::Array) type_error(key, "an array of [i0, i1, j0, j1] boxes", v);
    std::vector<CellBox> out;
    for (std::size_t i = 0; i < v.items.size(); ++i) {
      const std::string k = key + "[" + std::to_string(i) + "]";
      const Value& b = v.items[i];
      if (b.kind != Value::Kind::Array || b.items.size() != 4)
        throw ConfigError(k + ": expected [i0, i1, j0, j1]");
      int c[4];
      for (int j = 0; j < 4; ++j) {
        const long long x = as_integer(b.items[j], k);
        if (x < 0 || x > 1000000) throw ConfigError(k + ": index out of range");
        c[j] = int(x);
      }
      out.push_back({c[0], c[1], c[2], c[3]});
    }
    target = std::move(out);
  };
}

std::map<std::string, Setter> setters(RunConfig& c) {
  return {
      {"command", string(c.command)},
      {"mesh.kind", string(c.mesh.kind)},
      {"mesh.nx", integer(c.mesh.nx)},
      {"mesh.ny", integer(c.mesh.ny)},
      {"mesh.n_b", integer(c.mesh.n_b)},
      {"mesh.n_d", integer(c.mesh.n_d)},
      {"mesh.split", number(c.mesh.split)},
      {"mesh.n", integer(c.mesh.n)},
      {"mesh.boxes", box_list(c.mesh.boxes)},
      {"conductivity.intra", number(c.sigma_i)},
      {"conductivity.extra", number(c.sigma_e)},
      {"conductivity.damaged", number(c.sigma_d)},
      {"interface.alpha", number(c.alpha)},
      {"interface.beta", number(c.beta)},
      {"ionic.model", string(c.ionic_model)},
      {"ionic.enabled", boolean(c.ionic)},
      {"ionic.w_in", number(c.w_in)},
      {"sources.f1", string(c.f1)},
      {"sources.f2", string(c.f2)},
      {"sources.amplitude", number(c.source_amplitude)},
      {"initial.v0", string(c.v0)},
      {"initial.v0_amplitude", number(c.v0_amplitude)},
      {"initial.s0", string(c.s0)},
      {"initial.s0_value", number(c.s0_value)},
      {"time.dt", number(c.dt)},
      {"time.T", number(c.T)},
      {"solver.tol", number(c.tol)},
      {"output.every", integer(c.output_every)},
      {"output.dir", string(c.output_dir)},
      {"output.vtk", boolean(c.vtk)},
      {"study.betas", number_list(c.betas)},
      {"study.deltas", number_list(c.deltas)},
      {"study.datasets", integer(c.datasets)},
      {"study.levels", integer(c.levels)},
      {"study.seed", unsigned64(c.seed)},
  };
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_string) {
      ++i;
      continue;
    }
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError(key + ": " + why);
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    if (ch == '\t') {
      out += "\\t";
      continue;
    }
    out += ch;
  }
  return out + "\"";
}

std::string number_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out + "]";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  auto table = setters(c);
  static const std::set<std::string> sections = {"mesh",   "conductivity", "interface", "ionic",
                                                 "sources", "initial",     "time",      "solver",
                                                 "output",  "study"};
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) throw ConfigError(section + ": unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key + ": unknown key");
    if (!seen.insert(key).second) throw ConfigError(key + ": duplicate key");
    const std::string rhs = trim(line.substr(eq + 1));
    it->second(ValueParser(rhs, key).parse_all(), key);
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const RunConfig& c) {
  static const std::set<std::string> commands = {"run",        "mms",        "energy",
                                                 "coercivity", "beta-sweep", "stability"};
  require(commands.count(c.command) > 0, "command",
          "must be one of run, mms, energy, coercivity, beta-sweep, stability");
  const MeshSpec& m = c.mesh;
  require(m.kind == "interval" || m.kind == "split_rectangle" || m.kind == "inclusion", "mesh.kind",
          "must be interval, split_rectangle or inclusion");
  require(m.split > 0.0 && m.split < 1.0, "mesh.split", "must lie in (0, 1)");
  require(m.nx >= 1, "mesh.nx", "must be >= 1");
  require(m.ny >= 1, "mesh.ny", "must be >= 1");
  require(m.n_b >= 1, "mesh.n_b", "must be >= 1");
  require(m.n_d >= 1, "mesh.n_d", "must be >= 1");
  require(m.n >= 1, "mesh.n", "must be >= 1");
  try {
    (void)build_mesh(m);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("mesh: ") + e.what());
  }
  require(c.sigma_i > 0.0 && std::isfinite(c.sigma_i), "conductivity.intra", "must be positive");
  require(c.sigma_e > 0.0 && std::isfinite(c.sigma_e), "conductivity.extra", "must be positive");
  require(c.sigma_d > 0.0 && std::isfinite(c.sigma_d), "conductivity.damaged", "must be positive");
  require(c.alpha > 0.0 && std::isfinite(c.alpha), "interface.alpha", "must satisfy alpha > 0");
  require(c.beta >= 0.0 && std::isfinite(c.beta), "interface.beta", "must satisfy beta >= 0");
  const auto names = ionic_model_names();
  require(std::find(names.begin(), names.end(), c.ionic_model) != names.end(), "ionic.model",
          "unknown ionic model '" + c.ionic_model + "'");
  require(c.w_in >= 0.0 && c.w_in <= 1.0, "ionic.w_in", "must lie in [0, 1]");
  for (const auto& [key, v] : {std::pair{"sources.f1", c.f1}, std::pair{"sources.f2", c.f2}})
    require(v == "zero" || v == "constant" || v == "stimulus" || v == "random", key,
            "must be zero, constant, stimulus or random");
  require(std::isfinite(c.source_amplitude), "sources.amplitude", "must be finite");
  require(c.v0 == "zero" || c.v0 == "bump" || c.v0 == "random", "initial.v0",
          "must be zero, bump or random");
  require(std::isfinite(c.v0_amplitude), "initial.v0_amplitude", "must be finite");
  require(c.s0 == "zero" || c.s0 == "constant" || c.s0 == "random", "initial.s0",
          "must be zero, constant or random");
  require(std::isfinite(c.s0_value), "initial.s0_value", "must be finite");
  require(c.dt > 0.0 && std::isfinite(c.dt), "time.dt", "must be positive");
  require(c.T >= 0.0 && std::isfinite(c.T), "time.T", "must be non-negative");
  require(c.tol > 0.0 && c.tol < 1.0, "solver.tol", "must lie in (0, 1)");
  require(c.output_every >= 0, "output.every", "must be >= 0");
  require(!c.output_dir.empty(), "output.dir", "must not be empty");
  for (double b : c.betas) require(b > 0.0 && std::isfinite(b), "study.betas", "entries must be positive");
  for (double d : c.deltas) require(d >= 0.0 && std::isfinite(d), "study.deltas", "entries must be non-negative");
  require(c.datasets >= 1, "study.datasets", "must be >= 1");
  require(c.levels >= 2, "study.levels", "must be >= 2");
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  o << "command = " << quoted(c.command) << "\n\n[mesh]\n"
    << "kind = " << quoted(c.mesh.kind) << "\n"
    << "nx = " << c.mesh.nx << "\nny = " << c.mesh.ny << "\n"
    << "n_b = " << c.mesh.n_b << "\nn_d = " << c.mesh.n_d << "\n"
    << "split = " << format_double(c.mesh.split) << "\n"
    << "n = " << c.mesh.n << "\nboxes = [";
  for (std::size_t i = 0; i < c.mesh.boxes.size(); ++i) {
    const auto& b = c.mesh.boxes[i];
    o << (i ? ", " : "") << "[" << b.i0 << ", " << b.i1 << ", " << b.j0 << ", " << b.j1 << "]";
  }
  o << "]\n\n[conductivity]\n"
    << "intra = " << format_double(c.sigma_i) << "\nextra = " << format_double(c.sigma_e)
    << "\ndamaged = " << format_double(c.sigma_d) << "\n\n[interface]\n"
    << "alpha = " << format_double(c.alpha) << "\nbeta = " << format_double(c.beta) << "\n\n[ionic]\n"
    << "model = " << quoted(c.ionic_model) << "\nenabled = " << (c.ionic ? "true" : "false")
    << "\nw_in = " << format_double(c.w_in) << "\n\n[sources]\n"
    << "f1 = " << quoted(c.f1) << "\nf2 = " << quoted(c.f2)
    << "\namplitude = " << format_double(c.source_amplitude) << "\n\n[initial]\n"
    << "v0 = " << quoted(c.v0) << "\nv0_amplitude = " << format_double(c.v0_amplitude)
    << "\ns0 = " << quoted(c.s0) << "\ns0_value = " << format_double(c.s0_value) << "\n\n[time]\n"
    << "dt = " << format_double(c.dt) << "\nT = " << format_double(c.T) << "\n\n[solver]\n"
    << "tol = " << format_double(c.tol) << "\n\n[output]\n"
    << "every = " << c.output_every << "\ndir = " << quoted(c.output_dir)
    << "\nvtk = " << (c.vtk ? "true" : "false") << "\n\n[study]\n"
    << "betas = " << number_array(c.betas) << "\ndeltas = " << number_array(c.deltas)
    << "\ndatasets = " << c.datasets << "\nlevels = " << c.levels << "\nseed = " << c.seed << "\n";
  return o.str();
}

Mesh build_mesh(const MeshSpec& spec) {
  if (spec.kind == "interval") return build_interval_mesh(spec.n_b, spec.n_d, spec.split);
  if (spec.kind == "split_rectangle") return build_split_rectangle_mesh(spec.nx, spec.ny, spec.split);
  if (spec.kind == "inclusion") return build_inclusion_mesh(spec.n, spec.boxes);
  throw ConfigError("mesh.kind: unknown mesh kind '" + spec.kind + "'");
}

MeshSpec refine(const MeshSpec& spec) {
  MeshSpec out = spec;
  out.nx *= 2;
  out.ny *= 2;
  out.n_b *= 2;
  out.n_d *= 2;
  out.n *= 2;
  for (auto& b : out.boxes) b = {2 * b.i0, 2 * b.i1, 2 * b.j0, 2 * b.j1};
  return out;
}

Conductivities make_conductivities(const RunConfig& c, const Mesh& mesh) {
  return Conductivities::constant(mesh, c.sigma_i, c.sigma_e, c.sigma_d);
}

StepperConfig make_stepper_config(const RunConfig& c) {
  StepperConfig s;
  s.dt = c.dt;
  s.T = c.T;
  s.alpha = c.alpha;
  s.beta = c.beta;
  s.solver.tol = c.tol;
  s.ionic = c.ionic;
  s.model = make_ionic_model(c.ionic_model);
  s.snapshot_every = std::size_t(c.output_every);
  return s;
}

namespace {

SpaceTimeFn source_preset(const std::string& name, double amp, std::uint64_t seed, int dim) {
  if (name == "zero") return {};
  if (name == "constant") return [amp](const Point&, double) { return amp; };
  if (name == "stimulus")
    return [amp, dim](const Point& p, double t) {
      const double dx = p.x - 0.25, dy = dim == 1 ? 0.0 : p.y - 0.5;
      return (t <= 0.1 && dx * dx + dy * dy < 0.15 * 0.15) ? amp : 0.0;
    };
  return random_smooth_field(seed, amp, dim);
}

}  // namespace

SourceSet make_sources(const RunConfig& c, int dim) {
  SourceSet s;
  s.f1 = source_preset(c.f1, c.source_amplitude, 7 * c.seed + 1, dim);
  s.f2 = source_preset(c.f2, c.source_amplitude, 7 * c.seed + 2, dim);
  return s;
}

InitialData make_initial_data(const RunConfig& c, int dim) {
  InitialData init;
  const double a = c.v0_amplitude;
  if (c.v0 == "bump") {
    init.v0 = [a, dim](const Point& p) {
      const double dx = p.x - 0.25, dy = dim == 1 ? 0.0 : p.y - 0.5;
      return a * std::exp(-(dx * dx + dy * dy) / 0.02);
    };
  } else if (c.v0 == "random") {
    const SpaceTimeFn f = random_smooth_field(7 * c.seed + 3, a, dim);
    init.v0 = [f](const Point& p) { return f(p, 0.0); };
  }
  const double s = c.s0_value;
  if (c.s0 == "constant") {
    init.s0 = [s](const Point&) { return s; };
  } else if (c.s0 == "random") {
    const SpaceTimeFn f = random_smooth_field(7 * c.seed + 4, s, dim);
    init.s0 = [f](const Point& p) { return f(p, 0.0); };
  }
  const double w = c.w_in;
  init.w_in = [w](const Point&) { return w; };
  return init;
}

void write_csv_series(const std::vector<StepDiagnostics>& diag, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "step,t,v_l2,jump_l2,energy,grad_v_sq,grad_ub_sq,grad_ud_sq,cg_iterations,cg_residual\n";
  for (std::size_t k = 0; k < diag.size(); ++k) {
    const auto& d = diag[k];
    out << k << ',' << format_double(d.t) << ',' << format_double(std::sqrt(d.v_sq)) << ','
        << format_double(std::sqrt(d.jump_sq)) << ',' << format_double(d.energy) << ','
        << format_double(d.grad_v_sq) << ',' << format_double(d.grad_ub_sq) << ','
        << format_double(d.grad_ud_sq) << ',' << d.cg_iterations << ','
        << format_double(d.cg_residual) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void write_vtk_snapshot(const State& state, const Mesh& mesh, const DofMap& dofs,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::size_t nv = mesh.num_vertices(), nc = mesh.num_cells();
  const int per = mesh.vertices_per_cell();
  out << "# vtk DataFile Version 3.0\n"
      << "bidomain state t=" << format_double(state.t) << "\nASCII\nDATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << nv << " double\n";
  for (const auto& p : mesh.vertices())
    out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
  out << "CELLS " << nc << ' ' << nc * (per + 1) << '\n';
  for (const auto& c : mesh.cells()) {
    out << per;
    for (int k = 0; k < per; ++k) out << ' ' << c.v[k];
    out << '\n';
  }
  out << "CELL_TYPES " << nc << '\n';
  for (std::size_t c = 0; c < nc; ++c) out << (per == 3 ? 5 : 3) << '\n';
  out << "CELL_DATA " << nc << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (const auto& c : mesh.cells()) out << (c.region == Region::B ? 0 : 1) << '\n';

  out << "POINT_DATA " << nv << '\n';
  auto field = [&](const char* name, auto value_at) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t v = 0; v < nv; ++v) out << format_double(value_at(Index(v))) << '\n';
  };
  const std::size_t nub = dofs.num_ub();
  field("V", [&](Index v) { const Index i = dofs.b_index(v); return i < 0 ? 0.0 : state.V[i]; });
  field("U_B", [&](Index v) { const Index i = dofs.b_index(v); return i < 0 ? 0.0 : state.U[i]; });
  field("U_D", [&](Index v) {
    const Index i = dofs.d_index(v);
    return i < 0 ? 0.0 : state.U[nub + i];
  });
  field("w", [&](Index v) { const Index i = dofs.b_index(v); return i < 0 ? 0.0 : state.w[i]; });
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace bidomain
