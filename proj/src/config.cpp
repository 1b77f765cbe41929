#include "emscat/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace emscat {

using nlohmann::json;

namespace {

// Reads obj[key] into out when present.
template <class T>
void take(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError("config section '" + where + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError("unknown config key '" + (where.empty() ? k : where + "." + k) + "'");
}

json section(const json& root, const char* key) { return root.contains(key) ? root.at(key) : json::object(); }

void positive(double v, const std::string& what) {
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError(what + " must be positive");
}

}  // namespace

void RunConfig::validate() const {
  static const std::set<std::string> families{"zero", "field_a", "gaussian", "bump", "potential3d"};
  if (!families.count(field.family)) throw ConfigError("unknown field family '" + field.family + "'");
  if (field.dimension != 2 && field.dimension != 3) throw ConfigError("field.dimension must be 2 or 3");
  positive(field.width, "field.width");
  if (lines.angles < 1 || lines.offsets < 1) throw ConfigError("lines: angles and offsets must be >= 1");
  if (!(lines.max_offset >= 0)) throw ConfigError("lines.max_offset must be >= 0");
  for (double s : lines.speeds) positive(s, "lines.speeds entry");
  positive(tolerances.rtol, "tolerances.rtol");
  positive(tolerances.atol, "tolerances.atol");
  positive(tolerances.panel_width, "tolerances.panel_width");
  positive(tolerances.extrapolation, "tolerances.extrapolation");
  positive(tolerances.picard, "tolerances.picard");
  if (tolerances.panel_order < 2 || tolerances.panel_order > 64) throw ConfigError("tolerances.panel_order out of range");
  positive(grid.L, "grid.L");
  if (grid.N < 4) throw ConfigError("grid.N must be >= 4");
  if (grid.window != "hann" && grid.window != "none") throw ConfigError("grid.window must be hann or none");
  if (invert.mode != "a" && invert.mode != "b" && invert.mode != "exact")
    throw ConfigError("invert.mode must be a, b or exact");
  if (invert.angles < 4 || invert.offsets < 4) throw ConfigError("invert: angles and offsets must be >= 4");
  positive(invert.max_offset, "invert.max_offset");
  if (!(invert.flagged_quota >= 0 && invert.flagged_quota <= 1)) throw ConfigError("invert.flagged_quota must lie in [0,1]");
  for (double s : bounds.speeds) positive(s, "bounds.speeds entry");
  for (double x : bounds.offsets)
    if (!(x >= 0)) throw ConfigError("bounds.offsets entries must be >= 0");
  for (double s : small_angle.speeds) positive(s, "small_angle.speeds entry");
  if (small_angle.directions < 1) throw ConfigError("small_angle.directions must be >= 1");
  if (counterexample.angles < 1 || counterexample.offsets < 2) throw ConfigError("counterexample grid too small");
  positive(counterexample.max_offset, "counterexample.max_offset");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(root, "", {"field", "lines", "ladder", "tolerances", "grid", "invert", "bounds", "small_angle",
                       "counterexample", "out", "seed", "threads"});
  RunConfig c;
  {
    const json s = section(root, "field");
    only_keys(s, "field", {"family", "dimension", "potential_amplitude", "magnetic_amplitude", "width", "scale"});
    take(s, "family", c.field.family);
    take(s, "dimension", c.field.dimension);
    take(s, "potential_amplitude", c.field.potential_amplitude);
    take(s, "magnetic_amplitude", c.field.magnetic_amplitude);
    take(s, "width", c.field.width);
    take(s, "scale", c.field.scale);
  }
  {
    const json s = section(root, "lines");
    only_keys(s, "lines", {"angles", "offsets", "max_offset", "speeds"});
    take(s, "angles", c.lines.angles);
    take(s, "offsets", c.lines.offsets);
    take(s, "max_offset", c.lines.max_offset);
    take(s, "speeds", c.lines.speeds);
  }
  take(root, "ladder", c.ladder);
  {
    const json s = section(root, "tolerances");
    only_keys(s, "tolerances", {"rtol", "atol", "panel_width", "panel_order", "extrapolation", "picard"});
    take(s, "rtol", c.tolerances.rtol);
    take(s, "atol", c.tolerances.atol);
    take(s, "panel_width", c.tolerances.panel_width);
    take(s, "panel_order", c.tolerances.panel_order);
    take(s, "extrapolation", c.tolerances.extrapolation);
    take(s, "picard", c.tolerances.picard);
  }
  {
    const json s = section(root, "grid");
    only_keys(s, "grid", {"L", "N", "window"});
    take(s, "L", c.grid.L);
    take(s, "N", c.grid.N);
    take(s, "window", c.grid.window);
  }
  {
    const json s = section(root, "invert");
    only_keys(s, "invert", {"mode", "angles", "offsets", "max_offset", "flagged_quota", "sweep_file"});
    take(s, "mode", c.invert.mode);
    take(s, "angles", c.invert.angles);
    take(s, "offsets", c.invert.offsets);
    take(s, "max_offset", c.invert.max_offset);
    take(s, "flagged_quota", c.invert.flagged_quota);
    take(s, "sweep_file", c.invert.sweep_file);
  }
  {
    const json s = section(root, "bounds");
    only_keys(s, "bounds", {"speeds", "offsets"});
    take(s, "speeds", c.bounds.speeds);
    take(s, "offsets", c.bounds.offsets);
  }
  {
    const json s = section(root, "small_angle");
    only_keys(s, "small_angle", {"speeds", "offsets", "directions"});
    take(s, "speeds", c.small_angle.speeds);
    take(s, "offsets", c.small_angle.offsets);
    take(s, "directions", c.small_angle.directions);
  }
  {
    const json s = section(root, "counterexample");
    only_keys(s, "counterexample", {"angles", "offsets", "max_offset"});
    take(s, "angles", c.counterexample.angles);
    take(s, "offsets", c.counterexample.offsets);
    take(s, "max_offset", c.counterexample.max_offset);
  }
  take(root, "out", c.out);
  take(root, "seed", c.seed);
  take(root, "threads", c.threads);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["field"] = {{"family", c.field.family},
                {"dimension", c.field.dimension},
                {"potential_amplitude", c.field.potential_amplitude},
                {"magnetic_amplitude", c.field.magnetic_amplitude},
                {"width", c.field.width},
                {"scale", c.field.scale}};
  j["lines"] = {{"angles", c.lines.angles},
                {"offsets", c.lines.offsets},
                {"max_offset", c.lines.max_offset},
                {"speeds", c.lines.speeds}};
  j["ladder"] = c.ladder;
  j["tolerances"] = {{"rtol", c.tolerances.rtol},
                     {"atol", c.tolerances.atol},
                     {"panel_width", c.tolerances.panel_width},
                     {"panel_order", c.tolerances.panel_order},
                     {"extrapolation", c.tolerances.extrapolation},
                     {"picard", c.tolerances.picard}};
  j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}, {"window", c.grid.window}};
  j["invert"] = {{"mode", c.invert.mode},
                 {"angles", c.invert.angles},
                 {"offsets", c.invert.offsets},
                 {"max_offset", c.invert.max_offset},
                 {"flagged_quota", c.invert.flagged_quota},
                 {"sweep_file", c.invert.sweep_file}};
  j["bounds"] = {{"speeds", c.bounds.speeds}, {"offsets", c.bounds.offsets}};
  j["small_angle"] = {{"speeds", c.small_angle.speeds},
                      {"offsets", c.small_angle.offsets},
                      {"directions", c.small_angle.directions}};
  j["counterexample"] = {{"angles", c.counterexample.angles},
                         {"offsets", c.counterexample.offsets},
                         {"max_offset", c.counterexample.max_offset}};
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j.dump(2);
}

std::string config_hash(const RunConfig& c) {
  // threads and out do not change results
  RunConfig k = c;
  k.threads = 0;
  k.out.clear();
  const std::string text = serialize_config(k);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FieldPtr make_field(const FieldSpec& s) {
  FieldPtr f;
  if (s.family == "zero") return zero_field(s.dimension);
  if (s.family == "field_a") f = field_a();
  else if (s.family == "gaussian") f = gaussian_field(s.potential_amplitude, s.magnetic_amplitude, s.width);
  else if (s.family == "bump") f = bump_field(s.potential_amplitude, s.magnetic_amplitude, s.width);
  else if (s.family == "potential3d") f = default_potential3d_field();
  else throw ConfigError("unknown field family '" + s.family + "'");
  if (s.scale != 1) f = std::make_shared<ScaledField>(f, s.scale, s.scale);
  return f;
}

}  // namespace emscat
