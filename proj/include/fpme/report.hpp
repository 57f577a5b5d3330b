#pragma once

/// @file report.hpp
/// @brief Diagnostics reports as `key = value` blocks and CSV tables.

#include <string>
#include <utility>
#include <vector>

namespace fpme {

enum class SectionStatus { Pass, Fail, Skipped };

const char* to_string(SectionStatus s) noexcept;

struct ReportSection {
  std::string name;
  SectionStatus status = SectionStatus::Skipped;
  std::string reason;
  std::vector<std::pair<std::string, std::string>> values;

  void set(const std::string& key, double value);
  void set(const std::string& key, const std::string& value);
  void pass_if(bool ok, const std::string& why_not = {});
  void skip(const std::string& why);
};

/// Sections appear in insertion order:
///
///   [name]
///   status = pass|fail|skipped
///   reason = ...        (fail and skipped only)
///   key = value
struct DiagnosticsReport {
  std::vector<ReportSection> sections;

  ReportSection& add(const std::string& name);
  /// No section failed (skipped sections do not count).
  bool ok() const noexcept;
  std::string to_text() const;
};

/// Comma-separated table, doubles printed with %.17g.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// %.17g formatting shared by every writer.
std::string format_double(double v);

}  // namespace fpme
