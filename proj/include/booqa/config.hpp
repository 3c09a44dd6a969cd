#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "booqa/bench_synthesis.hpp"
#include "booqa/date.hpp"
#include "booqa/eval_harness.hpp"

namespace booqa {

// Parsed value of one `key = value` line: integer, float, bool, quoted string
// or a bracketed list of integers.
using ConfigValue = std::variant<std::int64_t, double, bool, std::string, std::vector<std::int64_t>>;

// Flat key/value file in TOML syntax. No tables, no nesting; `#` starts a
// comment outside of strings.
std::map<std::string, ConfigValue> parse_flat_toml(std::istream& in);

struct RunConfig {
  int window_span_days = 3;
  SynthesisConfig synthesis;
  std::size_t max_span = 4;
  std::string synset_strategy = "first";
  FrequencyBuckets buckets;
  double bucket_slack = 0.05;
  std::size_t target_positives = 0;  // 0 keeps every bundle
  std::optional<Date> boundary_date;
  EvalConfig eval;
  std::string honly_token = "true";

  static RunConfig from_toml(std::istream& in);
  static RunConfig from_file(const std::filesystem::path& path);

  // Every key in canonical order; parsing the output gives back an equal
  // config.
  std::string to_toml() const;
  std::string hash() const;  // SHA-256 of to_toml()
};

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace booqa
