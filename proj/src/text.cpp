#include "booqa/text.hpp"

#include <array>
#include <cctype>
#include <unordered_map>
#include <utility>

namespace booqa::text {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

// Detachment rules in the order WordNet's morphy applies them (verb rules,
// then noun rules, then adjective rules); duplicates are harmless.
constexpr std::array<std::pair<std::string_view, std::string_view>, 21> kDetachment{{
    {"ies", "y"}, {"es", "e"},   {"es", ""},    {"s", ""},     {"ed", "e"},
    {"ed", ""},   {"ing", "e"},  {"ing", ""},   {"ses", "s"},  {"xes", "x"},
    {"zes", "z"}, {"ches", "ch"}, {"shes", "sh"}, {"men", "man"}, {"er", ""},
    {"est", ""},  {"er", "e"},   {"est", "e"},  {"ied", "y"},  {"ying", "ie"},
    {"'s", ""},
}};

const std::unordered_map<std::string_view, std::string_view>& irregular_forms() {
  static const std::unordered_map<std::string_view, std::string_view> table{
      {"went", "go"},      {"gone", "go"},      {"did", "do"},       {"done", "do"},
      {"made", "make"},    {"said", "say"},     {"took", "take"},    {"taken", "take"},
      {"gave", "give"},    {"given", "give"},   {"got", "get"},      {"gotten", "get"},
      {"came", "come"},    {"saw", "see"},      {"seen", "see"},     {"told", "tell"},
      {"knew", "know"},    {"known", "know"},   {"found", "find"},   {"thought", "think"},
      {"bought", "buy"},   {"brought", "bring"}, {"held", "hold"},   {"left", "leave"},
      {"met", "meet"},     {"ran", "run"},      {"won", "win"},      {"lost", "lose"},
      {"paid", "pay"},     {"sold", "sell"},    {"sent", "send"},    {"spent", "spend"},
      {"built", "build"},  {"wrote", "write"},  {"written", "write"}, {"spoke", "speak"},
      {"spoken", "speak"}, {"began", "begin"},  {"begun", "begin"},  {"fell", "fall"},
      {"fallen", "fall"},  {"drove", "drive"},  {"driven", "drive"}, {"ate", "eat"},
      {"eaten", "eat"},    {"was", "be"},       {"were", "be"},      {"is", "be"},
      {"are", "be"},       {"been", "be"},      {"has", "have"},     {"had", "have"},
      {"led", "lead"},     {"fought", "fight"}, {"caught", "catch"}, {"taught", "teach"},
      {"struck", "strike"}, {"shot", "shoot"},  {"flew", "fly"},     {"flown", "fly"},
      {"children", "child"}, {"women", "woman"}, {"men", "man"},     {"feet", "foot"},
  };
  return table;
}

}  // namespace

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string normalize(std::string_view s) { return fold_case(normalize_whitespace(s)); }

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::vector<std::string> word_terms(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    auto uc = static_cast<unsigned char>(c);
    if (is_word_byte(uc)) {
      cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Lemmatizer::Lemmatizer(std::unordered_set<std::string> vocabulary)
    : vocabulary_(std::move(vocabulary)) {}

bool Lemmatizer::known(std::string_view token) const {
  return vocabulary_.contains(std::string(token));
}

std::string Lemmatizer::lemma(std::string_view token) const {
  std::string folded = fold_case(token);
  if (vocabulary_.empty() || vocabulary_.contains(folded)) return folded;

  const auto& irregular = irregular_forms();
  if (auto it = irregular.find(folded); it != irregular.end()) {
    std::string base(it->second);
    if (vocabulary_.contains(base)) return base;
  }
  for (const auto& [suffix, replacement] : kDetachment) {
    if (folded.size() <= suffix.size() || !folded.ends_with(suffix)) continue;
    std::string candidate = folded.substr(0, folded.size() - suffix.size());
    candidate.append(replacement);
    if (vocabulary_.contains(candidate)) return candidate;
  }
  return folded;
}

std::vector<std::string> Lemmatizer::lemmas(std::span<const std::string> tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lemma(t));
  return out;
}

std::string Lemmatizer::lemma_key(std::span<const std::string> tokens) const {
  auto l = lemmas(tokens);
  return join(l);
}

}  // namespace booqa::text
