#include "sysdetect/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "sysdetect/error.hpp"

namespace sysdetect {

double error_percent(double avg_calls, double avg_errors) {
  return avg_calls == 0.0 ? 0.0 : 100.0 * avg_errors / avg_calls;
}

namespace {

// Group names in output order, each with its member samples.
std::vector<std::pair<std::string, std::vector<const Sample*>>> groups_of(const Corpus& corpus,
                                                                          Grouping grouping) {
  std::vector<std::pair<std::string, std::vector<const Sample*>>> out;
  if (grouping == Grouping::Binary) {
    out = {{"malware", {}}, {"benign", {}}};
    for (const auto& s : corpus.samples) out[is_malware(s.category) ? 0 : 1].second.push_back(&s);
    for (const auto& [name, members] : out) {
      if (members.empty()) throw Error(ErrorCode::MissingGroup, "no " + name + " samples");
    }
    return out;
  }
  for (Category c : kAllCategories) {
    std::vector<const Sample*> members;
    for (const auto& s : corpus.samples) {
      if (s.category == c) members.push_back(&s);
    }
    if (!members.empty()) out.emplace_back(std::string(category_token(c)), std::move(members));
  }
  if (out.empty()) throw Error(ErrorCode::MissingGroup, "corpus is empty");
  return out;
}

}  // namespace

std::vector<CategoryStats> category_stats(const Corpus& corpus, Grouping grouping) {
  std::vector<CategoryStats> out;
  for (const auto& [name, members] : groups_of(corpus, grouping)) {
    CategoryStats s;
    s.group = name;
    s.samples = members.size();
    for (const Sample* m : members) {
      s.avg_calls += static_cast<double>(m->summary.total_calls);
      s.avg_errors += static_cast<double>(m->summary.total_errors);
    }
    s.avg_calls /= static_cast<double>(members.size());
    s.avg_errors /= static_cast<double>(members.size());
    s.error_percent = error_percent(s.avg_calls, s.avg_errors);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<GroupTopSyscalls> top_syscalls(const Corpus& corpus, std::size_t n, Grouping grouping) {
  std::vector<GroupTopSyscalls> out;
  for (const auto& [name, members] : groups_of(corpus, grouping)) {
    std::map<std::string, double> share;
    for (const Sample* m : members) {
      if (m->summary.total_calls <= 0) continue;
      const double total = static_cast<double>(m->summary.total_calls);
      for (const auto& r : m->summary.rows) share[r.syscall] += 100.0 * static_cast<double>(r.calls) / total;
    }
    GroupTopSyscalls g;
    g.group = name;
    for (const auto& [syscall, sum] : share) {
      g.entries.push_back({syscall, sum / static_cast<double>(members.size())});
    }
    // std::map iteration is already bytewise ascending, so a stable sort on
    // percentage keeps name order among ties.
    std::stable_sort(g.entries.begin(), g.entries.end(),
                     [](const auto& a, const auto& b) { return a.percentage > b.percentage; });
    if (n > 0 && g.entries.size() > n) g.entries.resize(n);
    out.push_back(std::move(g));
  }
  return out;
}

nlohmann::ordered_json analysis_json(const std::vector<CategoryStats>& stats,
                                     const std::vector<GroupTopSyscalls>& top) {
  using ojson = nlohmann::ordered_json;
  ojson s = ojson::array();
  for (const auto& c : stats) {
    s.push_back({{"group", c.group},
                 {"samples", c.samples},
                 {"avg_calls", c.avg_calls},
                 {"avg_errors", c.avg_errors},
                 {"error_percent", c.error_percent}});
  }
  ojson t = ojson::array();
  for (const auto& g : top) {
    ojson entries = ojson::array();
    for (const auto& e : g.entries) entries.push_back({{"syscall", e.syscall}, {"percentage", e.percentage}});
    t.push_back({{"group", g.group}, {"entries", std::move(entries)}});
  }
  return {{"category_stats", std::move(s)}, {"top_syscalls", std::move(t)}};
}

std::string category_stats_text(const std::vector<CategoryStats>& stats) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %12s %12s %8s\n", "", "Call", "Error", "Error %");
  out += buf;
  for (const auto& c : stats) {
    std::snprintf(buf, sizeof buf, "%-12s %12.0f %12.0f %8.2f\n", c.group.c_str(), c.avg_calls,
                  c.avg_errors, c.error_percent);
    out += buf;
  }
  return out;
}

std::string top_syscalls_text(const std::vector<GroupTopSyscalls>& top) {
  std::string out;
  char buf[160];
  for (const auto& g : top) {
    std::snprintf(buf, sizeof buf, "%s\n%-20s %10s\n", g.group.c_str(), "System call", "Percentage");
    out += buf;
    for (const auto& e : g.entries) {
      std::snprintf(buf, sizeof buf, "%-20s %10.2f\n", e.syscall.c_str(), e.percentage);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace sysdetect
