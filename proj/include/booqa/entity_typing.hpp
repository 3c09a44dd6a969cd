#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace booqa {

// Maps an argument string to a coarse entity type (FIGER-style labels such as
// "person" or "organization"). Returning nullopt means the assigner failed.
class TypeAssigner {
 public:
  virtual ~TypeAssigner() = default;
  virtual std::optional<std::string> assign(std::string_view argument) = 0;
  virtual bool concurrency_safe() const { return false; }
};

// Static lookup table, for fixtures and offline runs. Type labels map to
// themselves, so masking already-masked text is a no-op.
class GazetteerTypeAssigner : public TypeAssigner {
 public:
  GazetteerTypeAssigner() = default;
  explicit GazetteerTypeAssigner(std::unordered_map<std::string, std::string> entries);

  // Two tab-separated columns per line: argument, type.
  static GazetteerTypeAssigner from_tsv(std::istream& in);
  static GazetteerTypeAssigner from_tsv_file(const std::filesystem::path& path);

  void add(std::string_view argument, std::string_view type);
  std::optional<std::string> assign(std::string_view argument) override;
  bool concurrency_safe() const override { return true; }

 private:
  std::unordered_map<std::string, std::string> entries_;
  std::unordered_set<std::string> labels_;
};

class ConstantTypeAssigner : public TypeAssigner {
 public:
  explicit ConstantTypeAssigner(std::string label = "thing") : label_(std::move(label)) {}
  std::optional<std::string> assign(std::string_view) override { return label_; }
  bool concurrency_safe() const override { return true; }

 private:
  std::string label_;
};

}  // namespace booqa
