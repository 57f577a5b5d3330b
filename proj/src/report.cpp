#include "fpme/report.hpp"

#include <cstdio>
#include <sstream>

namespace fpme {

const char* to_string(SectionStatus s) noexcept {
  switch (s) {
    case SectionStatus::Pass: return "pass";
    case SectionStatus::Fail: return "fail";
    case SectionStatus::Skipped: return "skipped";
  }
  return "unknown";
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ReportSection::set(const std::string& key, double value) { values.emplace_back(key, format_double(value)); }

void ReportSection::set(const std::string& key, const std::string& value) { values.emplace_back(key, value); }

void ReportSection::pass_if(bool ok, const std::string& why_not) {
  status = ok ? SectionStatus::Pass : SectionStatus::Fail;
  reason = ok ? std::string() : why_not;
}

void ReportSection::skip(const std::string& why) {
  status = SectionStatus::Skipped;
  reason = why;
}

ReportSection& DiagnosticsReport::add(const std::string& name) {
  sections.push_back(ReportSection{name, SectionStatus::Skipped, "not evaluated", {}});
  return sections.back();
}

bool DiagnosticsReport::ok() const noexcept {
  for (const ReportSection& s : sections)
    if (s.status == SectionStatus::Fail) return false;
  return true;
}

std::string DiagnosticsReport::to_text() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const ReportSection& s = sections[i];
    if (i) os << '\n';
    os << '[' << s.name << "]\n";
    os << "status = " << to_string(s.status) << '\n';
    if (s.status != SectionStatus::Pass) os << "reason = " << s.reason << '\n';
    for (const auto& [k, v] : s.values) os << k << " = " << v << '\n';
  }
  return os.str();
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
  return os.str();
}

}  // namespace fpme
