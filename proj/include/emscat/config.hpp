#pragma once

#include "emscat/fields.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace emscat {

struct FieldSpec {
  std::string family = "field_a";  // zero | field_a | gaussian | bump | potential3d
  int dimension = 2;               // zero family only
  double potential_amplitude = 1;
  double magnetic_amplitude = 1;
  double width = 1;                // gaussian width / bump radius
  double scale = 1;                // multiplies V and B
};

struct LineSpec {
  int angles = 8;
  int offsets = 5;
  double max_offset = 2;
  std::vector<double> speeds{32};
};

struct ToleranceSpec {
  double rtol = 1e-10;
  double atol = 1e-12;
  double panel_width = 0.25;
  int panel_order = 16;
  double extrapolation = 0.05;
  double picard = 1e-13;
};

struct GridSpec {
  double L = 3;
  int N = 128;
  std::string window = "hann";  // hann | none
};

struct InvertSpec {
  std::string mode = "a";  // a: (grad V, B) from a_sc | b: V from b_sc with the true B | exact: no dynamics
  int angles = 256;
  int offsets = 128;
  double max_offset = 5;
  double flagged_quota = 0.02;
  std::string sweep_file;  // reuse a cached sweep instead of integrating
};

struct BoundsSpec {
  std::vector<double> speeds{1e3, 1e4, 1e5, 1e6, 1e7};
  std::vector<double> offsets{0, 1, 4};
};

struct SmallAngleSpec {
  std::vector<double> speeds{1e6};
  std::vector<double> offsets{1, 4};
  int directions = 2;  // random directions per (speed, offset), drawn from the seed
};

struct CounterexampleSpec {
  int angles = 32;
  int offsets = 64;
  double max_offset = 5.5;
};

struct RunConfig {
  FieldSpec field;
  LineSpec lines;
  std::vector<double> ladder{16, 32, 64};
  ToleranceSpec tolerances;
  GridSpec grid;
  InvertSpec invert;
  BoundsSpec bounds;
  SmallAngleSpec small_angle;
  CounterexampleSpec counterexample;
  std::string out = "out";
  std::uint64_t seed = 1;
  int threads = 0;

  // Throws ConfigError on non-positive tolerances, unknown names, bad sizes.
  void validate() const;
};

// JSON text; missing keys keep their defaults, unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Canonical JSON (sorted keys, fixed formatting).
std::string serialize_config(const RunConfig& c);
// FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& c);

FieldPtr make_field(const FieldSpec& spec);

}  // namespace emscat
