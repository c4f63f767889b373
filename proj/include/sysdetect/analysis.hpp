#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sysdetect/corpus.hpp"

namespace sysdetect {

/// Binary groups malware/benign, or one group per category.
enum class Grouping { Binary, Family };

struct CategoryStats {
  std::string group;
  std::size_t samples = 0;
  double avg_calls = 0.0;
  double avg_errors = 0.0;
  double error_percent = 0.0;
};

/// 100 * avg_errors / avg_calls, 0 when avg_calls is 0.
double error_percent(double avg_calls, double avg_errors);

/// Mean total_calls and total_errors per group. Binary grouping lists
/// malware then benign and throws MissingGroup unless both are present.
std::vector<CategoryStats> category_stats(const Corpus& corpus, Grouping grouping = Grouping::Binary);

struct TopSyscallEntry {
  std::string syscall;
  double percentage = 0.0;  // mean over the group of 100 * calls / total_calls
};

struct GroupTopSyscalls {
  std::string group;
  std::vector<TopSyscallEntry> entries;  // descending, ties by name
};

/// Per-sample call shares averaged over each group (absent syscalls count
/// as 0), sorted descending and truncated to n. n = 0 keeps every syscall.
std::vector<GroupTopSyscalls> top_syscalls(const Corpus& corpus, std::size_t n,
                                           Grouping grouping = Grouping::Binary);

nlohmann::ordered_json analysis_json(const std::vector<CategoryStats>& stats,
                                     const std::vector<GroupTopSyscalls>& top);
std::string category_stats_text(const std::vector<CategoryStats>& stats);
std::string top_syscalls_text(const std::vector<GroupTopSyscalls>& top);

}  // namespace sysdetect
