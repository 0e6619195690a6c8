#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adalloc/model.hpp"

namespace adalloc::io {

// Data errors carry the 1-based line number of the offending record.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::int64_t line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::int64_t line_number;
};
struct SchemaError : std::runtime_error {
  SchemaError(const std::string& msg, std::int64_t line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::int64_t line_number;
};

// Campaign file: one record per line, space separated:
//   <id> <budget_micro|inf> [fcap]
// "inf" marks the house campaign. Lines starting with '#' are skipped.
CampaignBook load_campaigns(const std::filesystem::path& path);
void write_campaigns(const std::filesystem::path& path, const CampaignBook& book);

// Impression file: one record per line, space separated:
//   <id> <user> <campaign_id>:<r_micro>:<a_micro> ...
// Campaign ids must exist in the book. Lines starting with '#' are skipped.
class ImpressionReader {
 public:
  ImpressionReader(const std::filesystem::path& path, const CampaignBook& book);
  // Next impression in file order, or nullopt at end of file.
  std::optional<Impression> next();
  std::int64_t line_number() const { return line_; }

 private:
  std::ifstream in_;
  const CampaignBook& book_;
  std::int64_t line_ = 0;
};

std::vector<Impression> load_impressions(const std::filesystem::path& path,
                                         const CampaignBook& book);
void write_impressions(const std::filesystem::path& path, std::span<const Impression> impressions,
                       const CampaignBook& book);

}  // namespace adalloc::io
