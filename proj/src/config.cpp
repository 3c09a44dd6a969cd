#include "booqa/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "booqa/errors.hpp"
#include "booqa/manifest.hpp"
#include "booqa/metrics.hpp"
#include "booqa/text.hpp"

namespace booqa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment, leaving `#` inside double quotes alone.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::string digits;
  for (char c : s) {
    if (c != '_') digits += c;
  }
  if (!digits.empty() && digits.front() == '+') digits.erase(0, 1);
  std::int64_t v = 0;
  const char* end = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(digits.data(), end, v);
  if (ec != std::errc() || ptr != end || digits.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string_view s) {
  std::string str(s);
  std::istringstream in(str);
  in.imbue(std::locale::classic());
  double v = 0;
  in >> v;
  if (in.fail() || !in.eof()) return std::nullopt;
  return v;
}

ConfigValue parse_value(std::string_view raw, const std::string& where) {
  if (raw.empty()) throw InputError(where + ": missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw InputError(where + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) {
        const char c = raw[++i];
        out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
      } else {
        out += raw[i];
      }
    }
    return out;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.front() == '[') {
    if (raw.back() != ']') throw InputError(where + ": unterminated list");
    std::vector<std::int64_t> items;
    std::string_view body = raw.substr(1, raw.size() - 2);
    while (!trim(body).empty()) {
      const auto comma = body.find(',');
      const auto item = trim(body.substr(0, comma));
      if (!item.empty()) {
        auto v = parse_int(item);
        if (!v) throw InputError(where + ": list items must be integers");
        items.push_back(*v);
      }
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    return items;
  }
  if (auto i = parse_int(raw)) return *i;
  if (auto d = parse_double(raw)) return *d;
  throw InputError(where + ": cannot parse value '" + std::string(raw) + "'");
}

std::int64_t as_int(const ConfigValue& v, const std::string& key) {
  if (auto p = std::get_if<std::int64_t>(&v)) return *p;
  throw InputError("config key " + key + " expects an integer");
}

std::size_t as_count(const ConfigValue& v, const std::string& key) {
  const auto i = as_int(v, key);
  if (i < 0) throw InputError("config key " + key + " must not be negative");
  return static_cast<std::size_t>(i);
}

double as_double(const ConfigValue& v, const std::string& key) {
  if (auto p = std::get_if<double>(&v)) return *p;
  if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
  throw InputError("config key " + key + " expects a number");
}

bool as_bool(const ConfigValue& v, const std::string& key) {
  if (auto p = std::get_if<bool>(&v)) return *p;
  throw InputError("config key " + key + " expects true or false");
}

const std::string& as_string(const ConfigValue& v, const std::string& key) {
  if (auto p = std::get_if<std::string>(&v)) return *p;
  throw InputError("config key " + key + " expects a quoted string");
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::map<std::string, ConfigValue> parse_flat_toml(std::istream& in) {
  std::map<std::string, ConfigValue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(strip_comment(line));
    if (content.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (content.front() == '[') throw InputError(where + ": tables are not supported");
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) throw InputError(where + ": expected key = value");
    const std::string key(trim(content.substr(0, eq)));
    if (key.empty()) throw InputError(where + ": empty key");
    if (out.contains(key)) throw InputError(where + ": duplicate key " + key);
    out.emplace(key, parse_value(trim(content.substr(eq + 1)), where));
  }
  return out;
}

RunConfig RunConfig::from_toml(std::istream& in) {
  const auto kv = parse_flat_toml(in);
  RunConfig c;
  static const std::set<std::string> known{
      "window_span_days", "min_articles",    "min_predicates", "min_argpairs",  "max_negatives",
      "transitive_hyponyms", "seed",         "max_span",       "synset_strategy", "bucket_boundaries",
      "bucket_slack",     "target_positives", "boundary_date", "retrieval",     "evidence_cap",
      "tfidf_k",          "jobs",            "auc_boundary",   "honly_token"};
  for (const auto& [key, value] : kv) try {
    if (!known.contains(key)) throw InputError("unknown config key: " + key);
    if (key == "window_span_days") {
      c.window_span_days = static_cast<int>(as_int(value, key));
      if (c.window_span_days < 1) throw InputError("window_span_days must be at least 1");
    } else if (key == "min_articles") {
      c.synthesis.min_articles = as_count(value, key);
    } else if (key == "min_predicates") {
      c.synthesis.min_predicates = as_count(value, key);
    } else if (key == "min_argpairs") {
      c.synthesis.min_argpairs = as_count(value, key);
    } else if (key == "max_negatives") {
      c.synthesis.max_negatives = as_count(value, key);
    } else if (key == "transitive_hyponyms") {
      c.synthesis.transitive_hyponyms = as_bool(value, key);
    } else if (key == "seed") {
      c.synthesis.seed = static_cast<std::uint64_t>(as_int(value, key));
    } else if (key == "max_span") {
      c.max_span = as_count(value, key);
    } else if (key == "synset_strategy") {
      c.synset_strategy = as_string(value, key);
      parse_synset_strategy(c.synset_strategy);
    } else if (key == "bucket_boundaries") {
      auto p = std::get_if<std::vector<std::int64_t>>(&value);
      if (!p) throw InputError("bucket_boundaries expects a list of integers");
      c.buckets.boundaries.clear();
      for (auto b : *p) {
        if (b < 0) throw InputError("bucket boundaries must not be negative");
        c.buckets.boundaries.push_back(static_cast<std::size_t>(b));
      }
      try {
        c.buckets.validate();
      } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
      }
    } else if (key == "bucket_slack") {
      c.bucket_slack = as_double(value, key);
      if (c.bucket_slack < 0) throw InputError("bucket_slack must not be negative");
    } else if (key == "target_positives") {
      c.target_positives = as_count(value, key);
    } else if (key == "boundary_date") {
      const auto& s = as_string(value, key);
      if (!s.empty()) {
        c.boundary_date = parse_iso_date(s);
        if (!c.boundary_date) throw InputError("boundary_date must be YYYY-MM-DD");
      }
    } else if (key == "retrieval") {
      c.eval.retrieval = parse_retrieval_mode(as_string(value, key));
    } else if (key == "evidence_cap") {
      c.eval.evidence_cap = as_count(value, key);
    } else if (key == "tfidf_k") {
      c.eval.tfidf_k = as_count(value, key);
    } else if (key == "jobs") {
      c.eval.jobs = static_cast<unsigned>(as_count(value, key));
    } else if (key == "auc_boundary") {
      c.eval.boundary = parse_left_boundary(as_string(value, key));
    } else if (key == "honly_token") {
      c.honly_token = as_string(value, key);
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(key + ": " + e.what());
  }
  try {
    c.eval.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  try {
    return from_toml(in);
  } catch (const std::invalid_argument& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string RunConfig::to_toml() const {
  std::ostringstream out;
  out << "window_span_days = " << window_span_days << '\n';
  out << "min_articles = " << synthesis.min_articles << '\n';
  out << "min_predicates = " << synthesis.min_predicates << '\n';
  out << "min_argpairs = " << synthesis.min_argpairs << '\n';
  out << "max_negatives = " << synthesis.max_negatives << '\n';
  out << "transitive_hyponyms = " << (synthesis.transitive_hyponyms ? "true" : "false") << '\n';
  out << "seed = " << synthesis.seed << '\n';
  out << "max_span = " << max_span << '\n';
  out << "synset_strategy = " << quote(synset_strategy) << '\n';
  out << "bucket_boundaries = [";
  for (std::size_t i = 0; i < buckets.boundaries.size(); ++i) out << (i ? ", " : "") << buckets.boundaries[i];
  out << "]\n";
  out << "bucket_slack = " << format_double(bucket_slack) << '\n';
  out << "target_positives = " << target_positives << '\n';
  out << "boundary_date = " << quote(boundary_date ? format_date(*boundary_date) : "") << '\n';
  out << "retrieval = " << quote(retrieval_mode_name(eval.retrieval)) << '\n';
  out << "evidence_cap = " << eval.evidence_cap << '\n';
  out << "tfidf_k = " << eval.tfidf_k << '\n';
  out << "jobs = " << eval.jobs << '\n';
  out << "auc_boundary = " << quote(left_boundary_name(eval.boundary)) << '\n';
  out << "honly_token = " << quote(honly_token) << '\n';
  return out.str();
}

std::string RunConfig::hash() const {
  // Parallelism does not change outputs, so it stays out of the hash.
  RunConfig copy = *this;
  copy.eval.jobs = 1;
  return sha256_hex(copy.to_toml());
}

bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_toml() == b.to_toml(); }

}  // namespace booqa
