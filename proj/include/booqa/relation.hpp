#pragma once

#include <string>
#include <vector>

namespace booqa {

// A binary proposition in surface form: "subject predicate object".
struct Relation {
  std::string subject;
  std::vector<std::string> predicate;
  std::string object;

  // Space-joined rendering; empty argument slots are omitted.
  std::string text() const;
  std::string predicate_text() const;
  friend bool operator==(const Relation&, const Relation&) = default;
};

}  // namespace booqa
