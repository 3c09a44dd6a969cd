#include "booqa/entity_typing.hpp"

#include <fstream>
#include <istream>

#include "booqa/errors.hpp"
#include "booqa/text.hpp"

namespace booqa {

GazetteerTypeAssigner::GazetteerTypeAssigner(std::unordered_map<std::string, std::string> entries) {
  for (auto& [arg, type] : entries) add(arg, type);
}

void GazetteerTypeAssigner::add(std::string_view argument, std::string_view type) {
  std::string label = text::normalize(type);
  entries_[text::normalize(argument)] = label;
  labels_.insert(std::move(label));
}

std::optional<std::string> GazetteerTypeAssigner::assign(std::string_view argument) {
  std::string key = text::normalize(argument);
  if (labels_.contains(key)) return key;
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

GazetteerTypeAssigner GazetteerTypeAssigner::from_tsv(std::istream& in) {
  GazetteerTypeAssigner g;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::normalize_whitespace(line).empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("gazetteer line " + std::to_string(line_no) + " has no tab");
    g.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return g;
}

GazetteerTypeAssigner GazetteerTypeAssigner::from_tsv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open gazetteer " + path.string());
  return from_tsv(in);
}

}  // namespace booqa
