#include "booqa/scorer.hpp"

#include <sstream>

namespace booqa {

std::string ConstantScorer::identity() const {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "constant:" << value_;
  return out.str();
}

}  // namespace booqa
