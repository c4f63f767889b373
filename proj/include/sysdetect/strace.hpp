#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sysdetect {

/// One data line of an strace `-c` summary table.
struct TraceRow {
  double time_percent = 0.0;
  double seconds = 0.0;
  std::int64_t usecs_per_call = 0;
  std::int64_t calls = 1;
  std::int64_t errors = 0;
  std::string syscall;  // verbatim token, never canonicalized

  bool operator==(const TraceRow&) const = default;
};

/// Parsed strace call-summary: data rows in file order plus the total row.
struct TraceSummary {
  std::vector<TraceRow> rows;
  double total_time_percent = 0.0;
  double total_seconds = 0.0;
  std::int64_t total_calls = 0;
  std::int64_t total_errors = 0;

  bool operator==(const TraceSummary&) const = default;
};

struct Violation {
  std::string invariant;  // "unique-names", "calls-sum", "errors-sum", "seconds-sum", "percent-sum"
  std::string expected;
  std::string observed;
};

/// Parses the six-column summary table. Columns are whitespace separated;
/// a blank errors field reads as 0 and the total row may omit usecs/call.
/// Throws sysdetect::Error with EmptyInput, MalformedHeader, MissingTotalRow,
/// BadFieldType or DuplicateSyscall.
TraceSummary parse_summary(std::string_view text);

/// Arithmetic consistency checks. Empty result iff the summary is consistent.
std::vector<Violation> validate_summary(const TraceSummary& summary);

/// Emits the table in strace's layout; parse_summary(render_summary(s)) == s
/// for any summary whose percents carry 2 decimals and seconds 6 decimals.
std::string render_summary(const TraceSummary& summary);

/// Builds a consistent summary from rows: totals are the row sums and each
/// row's time percent is recomputed from its share of the seconds.
TraceSummary summarize_rows(std::vector<TraceRow> rows);

}  // namespace sysdetect
