#include "sysdetect/strace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "sysdetect/error.hpp"

namespace sysdetect {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MissingTotalRow: return "MissingTotalRow";
    case ErrorCode::BadFieldType: return "BadFieldType";
    case ErrorCode::DuplicateSyscall: return "DuplicateSyscall";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::DuplicatePath: return "DuplicatePath";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::AllFilesFailed: return "AllFilesFailed";
    case ErrorCode::DegenerateFraction: return "DegenerateFraction";
    case ErrorCode::Io: return "Io";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::BadMatrix: return "BadMatrix";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::BadModel: return "BadModel";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::FoldMissingClass: return "FoldMissingClass";
    case ErrorCode::AllConfigsFailed: return "AllConfigsFailed";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::MissingGroup: return "MissingGroup";
    case ErrorCode::ScriptIncomplete: return "ScriptIncomplete";
    case ErrorCode::BadScript: return "BadScript";
  }
  return "Unknown";
}

bool is_parse_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput:
    case ErrorCode::MalformedHeader:
    case ErrorCode::MissingTotalRow:
    case ErrorCode::BadFieldType:
    case ErrorCode::DuplicateSyscall:
    case ErrorCode::BadHeader:
    case ErrorCode::UnknownCategory:
    case ErrorCode::DuplicatePath:
    case ErrorCode::EmptyManifest:
    case ErrorCode::BadMatrix:
    case ErrorCode::BadConfig:
    case ErrorCode::BadModel:
    case ErrorCode::BadScript:
      return true;
    default:
      return false;
  }
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

bool is_separator(const Line& line) {
  return std::all_of(line.tokens.begin(), line.tokens.end(), [](std::string_view t) {
    return std::all_of(t.begin(), t.end(), [](char c) { return c == '-'; });
  });
}

[[noreturn]] void bad_field(const Line& line, std::string_view what, std::string_view token) {
  throw Error(ErrorCode::BadFieldType, "line " + std::to_string(line.number) + ": " +
                                           std::string(what) + " '" + std::string(token) + "'");
}

double parse_real(const Line& line, std::string_view token, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value,
                                         std::chars_format::fixed);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value) ||
      value < 0.0) {
    bad_field(line, std::string("expected non-negative number for ") + std::string(what), token);
  }
  return value;
}

std::int64_t parse_count(const Line& line, std::string_view token, std::string_view what) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || value < 0) {
    bad_field(line, std::string("expected non-negative integer for ") + std::string(what), token);
  }
  return value;
}

bool header_ok(const Line& line) {
  // "% time" may appear as one token or two.
  std::string joined;
  for (auto t : line.tokens) {
    joined += t;
    joined += ' ';
  }
  static constexpr std::string_view kColumns[] = {"seconds", "usecs/call", "calls", "errors",
                                                  "syscall"};
  std::size_t pos = 0;
  if (joined.rfind("% time ", 0) == 0) {
    pos = 7;
  } else if (joined.rfind("%time ", 0) == 0) {
    pos = 6;
  } else {
    return false;
  }
  for (auto col : kColumns) {
    if (joined.compare(pos, col.size() + 1, std::string(col) + " ") != 0) return false;
    pos += col.size() + 1;
  }
  return pos == joined.size();
}

TraceRow parse_data_row(const Line& line) {
  const auto& tk = line.tokens;
  if (tk.size() != 5 && tk.size() != 6) {
    bad_field(line, "expected 5 or 6 columns, got " + std::to_string(tk.size()) + " in row", tk[0]);
  }
  TraceRow row;
  row.time_percent = parse_real(line, tk[0], "% time");
  row.seconds = parse_real(line, tk[1], "seconds");
  row.usecs_per_call = parse_count(line, tk[2], "usecs/call");
  row.calls = parse_count(line, tk[3], "calls");
  if (row.calls < 1) bad_field(line, "calls must be >= 1", tk[3]);
  row.errors = tk.size() == 6 ? parse_count(line, tk[4], "errors") : 0;
  row.syscall = std::string(tk.back());
  return row;
}

void parse_total_row(const Line& line, const std::vector<TraceRow>& rows, TraceSummary& out) {
  const auto& tk = line.tokens;
  out.total_time_percent = parse_real(line, tk[0], "% time");
  out.total_seconds = parse_real(line, tk[1], "seconds");
  std::int64_t calls_sum = 0;
  for (const auto& r : rows) calls_sum += r.calls;
  switch (tk.size()) {
    case 6:  // usecs/call present
      parse_count(line, tk[2], "usecs/call");
      out.total_calls = parse_count(line, tk[3], "calls");
      out.total_errors = parse_count(line, tk[4], "errors");
      break;
    case 5: {
      // Either usecs/call or errors is blank. Prefer the blank usecs/call
      // reading unless only the other one agrees with the row sum.
      const std::int64_t a = parse_count(line, tk[2], "calls");
      const std::int64_t b = parse_count(line, tk[3], "errors");
      if (a != calls_sum && b == calls_sum) {
        out.total_calls = b;
        out.total_errors = 0;
      } else {
        out.total_calls = a;
        out.total_errors = b;
      }
      break;
    }
    case 4:
      out.total_calls = parse_count(line, tk[2], "calls");
      out.total_errors = 0;
      break;
    default:
      bad_field(line, "expected 4 to 6 columns in total row, got " + std::to_string(tk.size()),
                tk[0]);
  }
}

}  // namespace

TraceSummary parse_summary(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    auto tokens = split_ws(text.substr(start, end - start));
    if (!tokens.empty()) lines.push_back({number, std::move(tokens)});
    start = end + 1;
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyInput, "no content");

  if (!header_ok(lines[0])) {
    throw Error(ErrorCode::MalformedHeader,
                "line " + std::to_string(lines[0].number) +
                    ": expected '% time seconds usecs/call calls errors syscall'");
  }
  if (lines.size() < 2 || !is_separator(lines[1])) {
    throw Error(ErrorCode::MalformedHeader, "missing dashed separator after header");
  }

  TraceSummary out;
  std::unordered_set<std::string> seen;
  std::size_t i = 2;
  for (; i < lines.size() && !is_separator(lines[i]); ++i) {
    const Line& line = lines[i];
    if (line.tokens.back() == "total") {
      throw Error(ErrorCode::MissingTotalRow,
                  "line " + std::to_string(line.number) + ": total row before closing separator");
    }
    TraceRow row = parse_data_row(line);
    if (!seen.insert(row.syscall).second) {
      throw Error(ErrorCode::DuplicateSyscall,
                  "line " + std::to_string(line.number) + ": '" + row.syscall + "'");
    }
    out.rows.push_back(std::move(row));
  }
  if (i >= lines.size()) throw Error(ErrorCode::MissingTotalRow, "no closing separator");
  ++i;
  if (i >= lines.size() || lines[i].tokens.back() != "total") {
    throw Error(ErrorCode::MissingTotalRow, "no 'total' row after closing separator");
  }
  parse_total_row(lines[i], out.rows, out);
  if (i + 1 < lines.size()) {
    bad_field(lines[i + 1], "unexpected content after total row", lines[i + 1].tokens[0]);
  }
  return out;
}

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::vector<Violation> validate_summary(const TraceSummary& s) {
  std::vector<Violation> out;
  std::unordered_set<std::string> names;
  for (const auto& r : s.rows) {
    if (!names.insert(r.syscall).second) {
      out.push_back({"unique-names", "unique", "duplicate '" + r.syscall + "'"});
    }
  }
  std::int64_t calls = 0, errors = 0;
  double seconds = 0.0, percent = 0.0;
  for (const auto& r : s.rows) {
    calls += r.calls;
    errors += r.errors;
    seconds += r.seconds;
    percent += r.time_percent;
  }
  if (calls != s.total_calls) {
    out.push_back({"calls-sum", std::to_string(s.total_calls), std::to_string(calls)});
  }
  if (errors != s.total_errors) {
    out.push_back({"errors-sum", std::to_string(s.total_errors), std::to_string(errors)});
  }
  const double n = static_cast<double>(s.rows.size());
  // Tolerances get a tiny floor so exact sums are not flagged by accumulation error.
  if (std::abs(seconds - s.total_seconds) > 5e-6 * n + 1e-9) {
    out.push_back({"seconds-sum", fmt("%.6f", s.total_seconds), fmt("%.6f", seconds)});
  }
  if (s.total_seconds > 0.0 && std::abs(percent - 100.0) > 0.01 * n + 1e-9) {
    out.push_back({"percent-sum", "100.00", fmt("%.2f", percent)});
  }
  return out;
}

std::string render_summary(const TraceSummary& s) {
  std::ostringstream os;
  std::size_t name_width = 16;
  for (const auto& r : s.rows) name_width = std::max(name_width, r.syscall.size());
  char buf[256];
  os << "% time     seconds  usecs/call     calls    errors syscall\n";
  const std::string sep = "------ ----------- ----------- --------- --------- " +
                          std::string(name_width, '-') + "\n";
  os << sep;
  for (const auto& r : s.rows) {
    if (r.errors > 0) {
      std::snprintf(buf, sizeof buf, "%6.2f %11.6f %11lld %9lld %9lld ", r.time_percent, r.seconds,
                    static_cast<long long>(r.usecs_per_call), static_cast<long long>(r.calls),
                    static_cast<long long>(r.errors));
    } else {
      std::snprintf(buf, sizeof buf, "%6.2f %11.6f %11lld %9lld %9s ", r.time_percent, r.seconds,
                    static_cast<long long>(r.usecs_per_call), static_cast<long long>(r.calls), "");
    }
    os << buf << r.syscall << "\n";
  }
  os << sep;
  std::snprintf(buf, sizeof buf, "%6.2f %11.6f %11s %9lld %9lld total\n", s.total_time_percent,
                s.total_seconds, "", static_cast<long long>(s.total_calls),
                static_cast<long long>(s.total_errors));
  os << buf;
  return os.str();
}

TraceSummary summarize_rows(std::vector<TraceRow> rows) {
  TraceSummary s;
  double seconds = 0.0;
  for (const auto& r : rows) {
    s.total_calls += r.calls;
    s.total_errors += r.errors;
    seconds += r.seconds;
  }
  s.total_seconds = std::round(seconds * 1e6) / 1e6;
  s.total_time_percent = 100.0;
  for (auto& r : rows) {
    r.time_percent = seconds > 0.0 ? std::round(1e4 * r.seconds / seconds) / 100.0 : 0.0;
  }
  s.rows = std::move(rows);
  return s;
}

}  // namespace sysdetect
