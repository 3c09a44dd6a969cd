#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace booqa {

// Malformed or inconsistent input files. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A referenced window, synset or record does not exist.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// An external scorer (bridge process, disambiguator, type assigner) failed
// beyond its retry budget. The CLI maps this to exit code 3.
class ScorerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-fatal condition worth reporting alongside a result.
struct Diagnostic {
  std::string code;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

}  // namespace booqa
