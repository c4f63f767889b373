#include "sysdetect/extraction.hpp"

#include <algorithm>
#include <set>

#include "sysdetect/corpus.hpp"
#include "sysdetect/error.hpp"
#include "sysdetect/strace.hpp"

namespace sysdetect {

using std::chrono::milliseconds;

EventSchedule default_event_schedule() {
  // Left column of the event table, then the right column; the repeated
  // INPUT_METHOD_CHANGED is kept once.
  return EventSchedule{{
      "BOOT_COMPLETED",        "SMS_RECEIVED",
      "DATA_SMS_RECEIVED",     "ACTION_ANSWER",
      "NEW_OUTGOING",          "ACTION_POWER_CONNECTED",
      "ACTION_POWER_DISCONNECTED", "BATTERY_OKAY",
      "BATTERY_LOW",           "BATTERY_EMPTY",
      "CONFIGURATION_CHANGED", "WAP_PUSH_RECEIVED",
      "DEVICE_STORAGE_OK",     "DEVICE_STORAGE_LOW",
      "SEND_TO",               "SMS_FULL",
      "SMS_SERVICE",           "STATE_CHANGED",
      "AIRPLANE_MODE",         "BATTERY_CHANGED",
      "DATE_CHANGED",          "INPUT_METHOD_CHANGED",
      "PROXY_CHANGE",
  }};
}

EventSchedule event_schedule_from_text(std::string_view text) {
  EventSchedule s;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty() || !seen.insert(line).second) continue;
    s.events.push_back(std::move(line));
  }
  return s;
}

namespace {

constexpr std::array<std::pair<Operation, std::string_view>, 15> kOperationNames = {{
    {Operation::RestoreSnapshot, "restore_snapshot"},
    {Operation::PollBootComplete, "poll_boot_complete"},
    {Operation::VerifyExerciser, "verify_exerciser"},
    {Operation::PackageNameOf, "package_name_of"},
    {Operation::AcquireRoot, "acquire_root"},
    {Operation::InstallAllPermissions, "install_all_permissions"},
    {Operation::Launch, "launch"},
    {Operation::WaitStable, "wait_stable"},
    {Operation::PidOf, "pid_of"},
    {Operation::TraceAttach, "trace_attach"},
    {Operation::SendRandomEvents, "send_random_events"},
    {Operation::Broadcast, "broadcast"},
    {Operation::Kill, "kill"},
    {Operation::PullTraceLog, "pull_trace_log"},
    {Operation::Uninstall, "uninstall"},
}};

}  // namespace

std::string_view operation_name(Operation op) {
  for (const auto& [o, name] : kOperationNames) {
    if (o == op) return name;
  }
  return "";
}

std::optional<Operation> parse_operation(std::string_view name) {
  for (const auto& [o, n] : kOperationNames) {
    if (n == name) return o;
  }
  return std::nullopt;
}

std::string_view op_status_name(OpStatus s) {
  switch (s) {
    case OpStatus::Ok: return "ok";
    case OpStatus::Failed: return "failed";
    case OpStatus::TimedOut: return "timeout";
  }
  return "";
}

std::string_view failure_kind_name(FailureKind k) {
  switch (k) {
    case FailureKind::StepFailed: return "StepFailed";
    case FailureKind::StepTimeout: return "StepTimeout";
    case FailureKind::SessionBroken: return "SessionBroken";
  }
  return "";
}

OpResult DeviceSession::execute(Operation op, const std::vector<std::string>& args,
                                milliseconds timeout) {
  transcript_.push_back({op, args, OpStatus::Failed, "in progress"});
  const std::size_t slot = transcript_.size() - 1;
  OpResult r;
  try {
    r = invoke(op, args, timeout);
  } catch (...) {
    transcript_[slot].detail = "session raised an exception";
    throw;
  }
  if (r.status == OpStatus::Ok && r.elapsed > timeout) {
    r.status = OpStatus::TimedOut;
    r.reason = "exceeded " + std::to_string(timeout.count()) + " ms";
  }
  transcript_[slot].status = r.status;
  transcript_[slot].detail = r.status == OpStatus::Ok ? "" : r.reason;
  return r;
}

namespace {

Behavior behavior_from_json(const nlohmann::json& j, Operation op) {
  auto bad = [&](const std::string& what) {
    throw Error(ErrorCode::BadScript, std::string(operation_name(op)) + ": " + what);
  };
  if (!j.is_object() || !j.contains("outcome") || !j["outcome"].is_string()) {
    bad("behavior needs an 'outcome' string");
  }
  Behavior b;
  const auto outcome = j["outcome"].get<std::string>();
  if (outcome == "ok") b.outcome = Behavior::Outcome::Ok;
  else if (outcome == "fail") b.outcome = Behavior::Outcome::Fail;
  else if (outcome == "delay_ms") b.outcome = Behavior::Outcome::Delay;
  else bad("unknown outcome '" + outcome + "'");
  if (j.contains("payload")) {
    const auto& p = j["payload"];
    if (p.is_string()) {
      b.payload = p.get<std::string>();
    } else if (p.is_number_integer()) {
      b.payload = std::to_string(p.get<long long>());
    } else if (p.is_object() && op == Operation::PullTraceLog) {
      std::vector<TraceRow> rows;
      if (!p.contains("rows") || !p["rows"].is_array()) bad("summary payload needs 'rows'");
      try {
        for (const auto& r : p["rows"]) {
          TraceRow row;
          row.syscall = r.at("syscall").get<std::string>();
          row.calls = r.at("calls").get<std::int64_t>();
          row.errors = r.value("errors", std::int64_t{0});
          row.seconds = r.value("seconds", 0.0);
          row.usecs_per_call = r.value("usecs_per_call", std::int64_t{0});
          rows.push_back(std::move(row));
        }
      } catch (const nlohmann::json::exception& e) {
        bad(e.what());
      }
      b.payload = render_summary(summarize_rows(std::move(rows)));
    } else if (!p.is_null()) {
      bad("unsupported payload type");
    }
  }
  if (b.outcome == Behavior::Outcome::Delay) {
    if (!j.contains("delay_ms") || !j["delay_ms"].is_number()) bad("delay_ms outcome needs 'delay_ms'");
    b.delay = milliseconds(j["delay_ms"].get<long long>());
  }
  return b;
}

}  // namespace

DeviceScript script_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::BadScript, "script must be a JSON object");
  DeviceScript script;
  for (const auto& [key, value] : doc.items()) {
    if (key == "default") {
      script.fallback = behavior_from_json(value, Operation::RestoreSnapshot);
      continue;
    }
    const auto op = parse_operation(key);
    if (!op) throw Error(ErrorCode::BadScript, "unknown operation '" + key + "'");
    std::vector<Behavior> list;
    if (value.is_array()) {
      for (const auto& v : value) list.push_back(behavior_from_json(v, *op));
      if (list.empty()) throw Error(ErrorCode::BadScript, key + ": empty behavior list");
    } else {
      list.push_back(behavior_from_json(value, *op));
    }
    script.behaviors[*op] = std::move(list);
  }
  return script;
}

OpResult ScriptedDevice::invoke(Operation op, const std::vector<std::string>&, milliseconds) {
  const Behavior* b = nullptr;
  if (const auto it = script_.behaviors.find(op); it != script_.behaviors.end()) {
    const std::size_t n = calls_[op]++;
    b = &it->second[std::min(n, it->second.size() - 1)];
  } else if (script_.fallback) {
    b = &*script_.fallback;
  } else {
    throw Error(ErrorCode::ScriptIncomplete,
                "no behavior for '" + std::string(operation_name(op)) + "'");
  }
  OpResult r;
  r.output = b->payload;
  switch (b->outcome) {
    case Behavior::Outcome::Ok:
      break;
    case Behavior::Outcome::Fail:
      r.status = OpStatus::Failed;
      r.reason = b->payload.empty() ? "scripted failure" : b->payload;
      r.output.clear();
      break;
    case Behavior::Outcome::Delay:
      r.elapsed = b->delay;
      break;
  }
  return r;
}

ScriptedDevice make_scripted_device(DeviceScript script) { return ScriptedDevice(std::move(script)); }

DeviceScript cooperative_script(std::string package, std::string pid, std::string log_text) {
  DeviceScript s;
  s.fallback = Behavior{};
  s.behaviors[Operation::PackageNameOf] = {Behavior{Behavior::Outcome::Ok, std::move(package), {}}};
  s.behaviors[Operation::PidOf] = {Behavior{Behavior::Outcome::Ok, std::move(pid), {}}};
  s.behaviors[Operation::PullTraceLog] = {Behavior{Behavior::Outcome::Ok, std::move(log_text), {}}};
  return s;
}

StepTimeouts StepTimeouts::defaults() {
  StepTimeouts t = uniform(milliseconds(30'000));
  t.step[0] = milliseconds(180'000);   // snapshot restore and boot
  t.step[4] = milliseconds(120'000);   // install and launch
  t.step[7] = milliseconds(300'000);   // random interaction
  t.step[9] = milliseconds(300'000);   // broadcast + interaction loop
  t.step[11] = milliseconds(120'000);  // pull and uninstall
  return t;
}

StepTimeouts StepTimeouts::uniform(milliseconds all) {
  StepTimeouts t;
  t.step.fill(all);
  return t;
}

namespace {

struct StepAbort {
  StepFailure failure;
};

class ProtocolRun {
 public:
  ProtocolRun(DeviceSession& session, const StepTimeouts& timeouts)
      : session_(session), timeouts_(timeouts) {}

  std::string call(int step, Operation op, std::vector<std::string> args = {}) {
    OpResult r;
    try {
      r = session_.execute(op, args, timeouts_.step[static_cast<std::size_t>(step - 1)]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ScriptIncomplete) throw;
      throw StepAbort{{step, FailureKind::SessionBroken, e.what()}};
    } catch (const std::exception& e) {
      throw StepAbort{{step, FailureKind::SessionBroken, e.what()}};
    }
    const std::string what = std::string(operation_name(op));
    if (r.status == OpStatus::TimedOut) {
      throw StepAbort{{step, FailureKind::StepTimeout, what + ": " + r.reason}};
    }
    if (r.status == OpStatus::Failed) {
      throw StepAbort{{step, FailureKind::StepFailed, what + ": " + r.reason}};
    }
    return r.output;
  }

 private:
  DeviceSession& session_;
  const StepTimeouts& timeouts_;
};

std::string first_line(std::string s) {
  const auto nl = s.find_first_of("\r\n");
  if (nl != std::string::npos) s.resize(nl);
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  return s;
}

}  // namespace

ExtractionResult run_protocol(DeviceSession& session, const std::string& apk_ref,
                              const EventSchedule& schedule, int random_event_count,
                              const StepTimeouts& timeouts) {
  if (schedule.events.empty()) throw Error(ErrorCode::BadScript, "event schedule is empty");
  if (random_event_count < 0) throw Error(ErrorCode::BadScript, "random event count must be >= 0");
  ProtocolRun run(session, timeouts);
  ExtractionResult result;
  const std::string count = std::to_string(random_event_count);
  bool installed_known = false;
  try {
    run.call(1, Operation::RestoreSnapshot);
    run.call(1, Operation::PollBootComplete);
    run.call(2, Operation::VerifyExerciser);
    std::string package = first_line(run.call(3, Operation::PackageNameOf, {apk_ref}));
    if (package.empty()) {
      throw StepAbort{{3, FailureKind::StepFailed, "package_name_of: empty package name"}};
    }
    result.package = package;
    installed_known = true;
    run.call(4, Operation::AcquireRoot);
    run.call(5, Operation::InstallAllPermissions, {apk_ref});
    run.call(5, Operation::Launch, {package});
    run.call(6, Operation::WaitStable);
    const std::string pid = first_line(run.call(7, Operation::PidOf, {package}));
    if (pid.empty() || pid.find_first_not_of("0123456789") != std::string::npos) {
      throw StepAbort{{7, FailureKind::StepFailed, "pid_of: not a pid '" + pid + "'"}};
    }
    run.call(7, Operation::TraceAttach, {pid});
    run.call(8, Operation::SendRandomEvents, {package, count});
    for (const auto& event : schedule.events) {
      run.call(9, Operation::Broadcast, {event});
      run.call(10, Operation::SendRandomEvents, {package, count});
    }
    run.call(11, Operation::Kill, {pid});
    std::string log = run.call(12, Operation::PullTraceLog);
    try {
      parse_summary(log);
    } catch (const Error& e) {
      throw StepAbort{{12, FailureKind::StepFailed, std::string("pulled log does not parse: ") + e.what()}};
    }
    installed_known = false;  // uninstall below is the step itself, not cleanup
    run.call(12, Operation::Uninstall, {package});
    result.log_text = std::move(log);
  } catch (const StepAbort& abort) {
    result.failure = abort.failure;
    result.log_text.reset();
    if (installed_known) {
      try {
        session.execute(Operation::Uninstall, {result.package}, timeouts.step[11]);
      } catch (const std::exception&) {
        // the recorded failure already describes the run
      }
    }
  }
  result.transcript = session.transcript();
  return result;
}

std::string transcript_tsv(const Transcript& transcript) {
  std::string out = "seq\toperation\targs\tstatus\tdetail\n";
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    const auto& e = transcript[i];
    std::string args;
    for (std::size_t a = 0; a < e.args.size(); ++a) args += (a ? " " : "") + e.args[a];
    std::string detail = e.detail;
    std::replace(detail.begin(), detail.end(), '\t', ' ');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    out += std::to_string(i + 1) + "\t" + std::string(operation_name(e.op)) + "\t" + args + "\t" +
           std::string(op_status_name(e.status)) + "\t" + detail + "\n";
  }
  return out;
}

nlohmann::ordered_json extraction_status_json(const ExtractionResult& result) {
  nlohmann::ordered_json j;
  j["status"] = result.success() ? "success" : "failure";
  j["package"] = result.package;
  if (result.failure) {
    j["step"] = result.failure->step;
    j["kind"] = failure_kind_name(result.failure->kind);
    j["reason"] = result.failure->reason;
  }
  j["operations"] = result.transcript.size();
  return j;
}

void write_extraction_result(const ExtractionResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto trace = dir / "trace.log";
  if (result.log_text) write_text_file(trace, *result.log_text);
  else std::filesystem::remove(trace);
  write_text_file(dir / "transcript.tsv", transcript_tsv(result.transcript));
  write_text_file(dir / "status.json", extraction_status_json(result).dump(2) + "\n");
}

}  // namespace sysdetect
