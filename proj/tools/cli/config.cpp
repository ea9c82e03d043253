#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace bifl::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail("unknown key \"" + key + "\" in " + where);
  }
}

std::string join(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double get_number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(where, key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(join(where, key) + " must be finite");
  return d;
}

double require_number(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) fail(join(where, key) + " is required");
  return get_number(obj, where, key, 0.0);
}

long long get_integer(const json& obj, const std::string& where, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(where, key) + " must be an integer");
  return v.get<long long>();
}

std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(join(where, key) + " must be a string");
  return v.get<std::string>();
}

Vec3 get_vec3(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) fail(join(where, key) + " is required");
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); }))
    fail(join(where, key) + " must be an array of three numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  return doc.contains(key) ? doc.at(key) : empty;
}

int parse_axis(const json& obj, const std::string& where) {
  if (!obj.contains("axis")) return 2;
  const json& v = obj.at("axis");
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "z") return 2;
  } else if (v.is_number_integer()) {
    const long long a = v.get<long long>();
    if (a >= 0 && a <= 2) return static_cast<int>(a);
  }
  fail(where + ".axis must be \"x\", \"y\", \"z\" or 0..2");
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json canonical_of(const RunConfig& c) {
  json doc;
  doc["grid"] = {{"n", c.grid.n}, {"h", c.grid.h}};
  doc["model"] = {{"b", c.model.b}, {"model", std::string(to_string(c.model.model))}, {"c", c.model.c}};
  json pcs = json::array();
  for (const auto& p : c.sources.point_charges) pcs.push_back({{"q", p.q}, {"pos", vec_json(p.pos)}});
  json blobs = json::array();
  for (const auto& b : c.sources.charge_blobs)
    blobs.push_back({{"q", b.q}, {"pos", vec_json(b.pos)}, {"width", b.width}});
  json loops = json::array();
  for (const auto& l : c.sources.current_loops)
    loops.push_back({{"moment", l.moment}, {"pos", vec_json(l.pos)}, {"width", l.width}, {"axis", l.axis}});
  doc["sources"] = {{"point_charges", pcs}, {"charge_blobs", blobs}, {"current_loops", loops}};
  const SolveConfig& s = c.solve;
  doc["solve"] = {{"tol", s.tol},
                  {"max_iter", s.max_iter},
                  {"feasibility_margin", s.feasibility_margin},
                  {"seed", s.seed},
                  {"inner_tol", s.inner_tol},
                  {"max_inner_iter", s.max_inner_iter},
                  {"line_search",
                   {{"armijo", s.line_search.armijo},
                    {"shrink", s.line_search.shrink},
                    {"max_backtracks", s.line_search.max_backtracks}}}};
  doc["output"] = {{"dump", c.output.dump}, {"csv", c.output.csv}, {"summary", c.output.summary}, {"log", c.output.log}};
  doc["probe"] = {{"n_starts", c.probe.n_starts}};
  doc["perturb"] = {{"order", c.perturb.order}};
  return doc;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

RunConfig parse_config(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character.
    const auto [line, col] = line_column(document, e.byte > 0 ? e.byte - 1 : 0);
    std::ostringstream os;
    os << "parse error at line " << line << ", column " << col << ": " << e.what();
    fail(os.str());
  }
  check_keys(doc, "document", {"grid", "model", "sources", "solve", "output", "probe", "perturb"});

  RunConfig c;
  const json& grid = section(doc, "grid");
  check_keys(grid, "grid", {"n", "h"});
  c.grid.n = static_cast<int>(get_integer(grid, "grid", "n", c.grid.n));
  c.grid.h = get_number(grid, "grid", "h", c.grid.h);
  if (c.grid.n < 8 || c.grid.n % 2 != 0) fail("grid.n must be an even integer of at least 8");
  if (c.grid.n > 1024) fail("grid.n must not exceed 1024");
  if (!(c.grid.h > 0.0)) fail("grid.h must be positive");

  const json& model = section(doc, "model");
  check_keys(model, "model", {"b", "model", "c"});
  c.model.b = get_number(model, "model", "b", c.model.b);
  c.model.c = get_number(model, "model", "c", c.model.c);
  const std::string name = get_string(model, "model", "model", "MBI");
  if (name == "MBI") {
    c.model.model = Model::MBI;
  } else if (name == "MB") {
    c.model.model = Model::MB;
  } else {
    fail("model.model must be \"MBI\" or \"MB\"");
  }
  if (!(c.model.b > 0.0)) fail("model.b must be positive");
  if (!(c.model.c > 0.0)) fail("model.c must be positive");

  const json& src = section(doc, "sources");
  check_keys(src, "sources", {"point_charges", "charge_blobs", "current_loops"});
  auto list = [&](const char* key) -> const json& {
    static const json empty = json::array();
    if (!src.contains(key)) return empty;
    const json& v = src.at(key);
    if (!v.is_array()) fail(std::string("sources.") + key + " must be an array");
    return v;
  };
  {
    const json& pcs = list("point_charges");
    for (std::size_t i = 0; i < pcs.size(); ++i) {
      const std::string where = "sources.point_charges[" + std::to_string(i) + "]";
      check_keys(pcs[i], where, {"q", "pos"});
      c.sources.point_charges.push_back({require_number(pcs[i], where, "q"), get_vec3(pcs[i], where, "pos")});
    }
    const json& blobs = list("charge_blobs");
    for (std::size_t i = 0; i < blobs.size(); ++i) {
      const std::string where = "sources.charge_blobs[" + std::to_string(i) + "]";
      check_keys(blobs[i], where, {"q", "pos", "width"});
      ChargeBlob b{require_number(blobs[i], where, "q"), get_vec3(blobs[i], where, "pos"),
                   require_number(blobs[i], where, "width")};
      if (!(b.width > 0.0)) fail(where + ".width must be positive");
      c.sources.charge_blobs.push_back(b);
    }
    const json& loops = list("current_loops");
    for (std::size_t i = 0; i < loops.size(); ++i) {
      const std::string where = "sources.current_loops[" + std::to_string(i) + "]";
      check_keys(loops[i], where, {"moment", "pos", "width", "axis"});
      CurrentLoop l{require_number(loops[i], where, "moment"), get_vec3(loops[i], where, "pos"),
                    require_number(loops[i], where, "width"), parse_axis(loops[i], where)};
      if (!(l.width > 0.0)) fail(where + ".width must be positive");
      c.sources.current_loops.push_back(l);
    }
  }

  const json& solve = section(doc, "solve");
  check_keys(solve, "solve",
             {"tol", "max_iter", "feasibility_margin", "seed", "inner_tol", "max_inner_iter", "line_search"});
  SolveConfig& s = c.solve;
  s.tol = get_number(solve, "solve", "tol", s.tol);
  s.max_iter = static_cast<int>(get_integer(solve, "solve", "max_iter", s.max_iter));
  s.feasibility_margin = get_number(solve, "solve", "feasibility_margin", s.feasibility_margin);
  {
    const long long seed = get_integer(solve, "solve", "seed", 0);
    if (seed < 0) fail("solve.seed must be nonnegative");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  s.inner_tol = get_number(solve, "solve", "inner_tol", s.inner_tol);
  s.max_inner_iter = static_cast<int>(get_integer(solve, "solve", "max_inner_iter", s.max_inner_iter));
  const json& ls = section(solve, "line_search");
  check_keys(ls, "solve.line_search", {"armijo", "shrink", "max_backtracks"});
  s.line_search.armijo = get_number(ls, "solve.line_search", "armijo", s.line_search.armijo);
  s.line_search.shrink = get_number(ls, "solve.line_search", "shrink", s.line_search.shrink);
  s.line_search.max_backtracks =
      static_cast<int>(get_integer(ls, "solve.line_search", "max_backtracks", s.line_search.max_backtracks));

  const json& out = section(doc, "output");
  check_keys(out, "output", {"dump", "csv", "summary", "log"});
  c.output.dump = get_string(out, "output", "dump", "");
  c.output.csv = get_string(out, "output", "csv", "");
  c.output.summary = get_string(out, "output", "summary", "");
  c.output.log = get_string(out, "output", "log", "");

  const json& probe = section(doc, "probe");
  check_keys(probe, "probe", {"n_starts"});
  c.probe.n_starts = static_cast<int>(get_integer(probe, "probe", "n_starts", c.probe.n_starts));
  if (c.probe.n_starts < 2) fail("probe.n_starts must be at least 2");

  const json& perturb = section(doc, "perturb");
  check_keys(perturb, "perturb", {"order"});
  c.perturb.order = static_cast<int>(get_integer(perturb, "perturb", "order", c.perturb.order));
  if (c.perturb.order < 0 || c.perturb.order > 2) fail("perturb.order must be 0, 1 or 2");

  try {
    c.solve.validate();
    // Placement preconditions of every source.
    (void)deposit_sources(c.sources, c.grid, c.model.c);
  } catch (const PreconditionError& e) {
    fail(e.what());
  }
  c.canonical = canonical_of(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_digest(const RunConfig& cfg) { return fnv1a_hex(cfg.canonical.dump()); }

}  // namespace bifl::cli
