#include "booqa/relation.hpp"

#include "booqa/text.hpp"

namespace booqa {

std::string Relation::predicate_text() const { return text::join(predicate); }

std::string Relation::text() const {
  std::string out;
  auto append = [&out](const std::string& part) {
    if (part.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += part;
  };
  append(subject);
  append(predicate_text());
  append(object);
  return out;
}

}  // namespace booqa
