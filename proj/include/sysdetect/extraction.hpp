#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sysdetect {

/// Trigger events broadcast to the app after the tracer is attached.
struct EventSchedule {
  std::vector<std::string> events;
};

/// The 23 distinct system events, BOOT_COMPLETED first.
EventSchedule default_event_schedule();

/// One event per line; blank lines skipped, duplicates dropped after their
/// first occurrence.
EventSchedule event_schedule_from_text(std::string_view text);

enum class Operation {
  RestoreSnapshot,
  PollBootComplete,
  VerifyExerciser,
  PackageNameOf,
  AcquireRoot,
  InstallAllPermissions,
  Launch,
  WaitStable,
  PidOf,
  TraceAttach,
  SendRandomEvents,
  Broadcast,
  Kill,
  PullTraceLog,
  Uninstall,
};

std::string_view operation_name(Operation op);  // "restore_snapshot", ...
std::optional<Operation> parse_operation(std::string_view name);

enum class OpStatus { Ok, Failed, TimedOut };

std::string_view op_status_name(OpStatus s);

struct OpResult {
  OpStatus status = OpStatus::Ok;
  std::string output;  // package name, pid, log text, ...
  std::string reason;
  std::chrono::milliseconds elapsed{0};
};

struct TranscriptEntry {
  Operation op;
  std::vector<std::string> args;
  OpStatus status;
  std::string detail;
};

using Transcript = std::vector<TranscriptEntry>;

/// A device the extraction protocol drives. Every call goes through
/// execute(), which appends to the transcript and turns over-budget
/// operations into timeouts. Implementations that block must themselves
/// give up once `timeout` has passed.
class DeviceSession {
 public:
  virtual ~DeviceSession() = default;

  OpResult execute(Operation op, const std::vector<std::string>& args,
                   std::chrono::milliseconds timeout);

  const Transcript& transcript() const { return transcript_; }

 protected:
  virtual OpResult invoke(Operation op, const std::vector<std::string>& args,
                          std::chrono::milliseconds timeout) = 0;

 private:
  Transcript transcript_;
};

struct Behavior {
  enum class Outcome { Ok, Fail, Delay };
  Outcome outcome = Outcome::Ok;
  std::string payload;
  std::chrono::milliseconds delay{0};  // Delay: simulated duration before success
};

/// Behaviors per operation. A list is consumed one entry per call with the
/// last entry repeating; `fallback` covers operations without an entry.
struct DeviceScript {
  std::map<Operation, std::vector<Behavior>> behaviors;
  std::optional<Behavior> fallback;
};

/// JSON: {"<operation>": {"outcome": "ok"|"fail"|"delay_ms", "payload": ...,
/// "delay_ms": N} or a list of those, "default": {...}}. A pull_trace_log
/// payload may be an object {"rows": [...]} which is rendered as an strace
/// summary. Throws BadScript.
DeviceScript script_from_json(const nlohmann::json& doc);

/// Deterministic in-memory device with a simulated clock. Invoking an
/// operation with no behavior throws ScriptIncomplete.
class ScriptedDevice final : public DeviceSession {
 public:
  explicit ScriptedDevice(DeviceScript script) : script_(std::move(script)) {}

 protected:
  OpResult invoke(Operation op, const std::vector<std::string>& args,
                  std::chrono::milliseconds timeout) override;

 private:
  DeviceScript script_;
  std::map<Operation, std::size_t> calls_;
};

ScriptedDevice make_scripted_device(DeviceScript script);

/// A script in which every operation succeeds and the pulled log is
/// `log_text`.
DeviceScript cooperative_script(std::string package, std::string pid, std::string log_text);

/// Per-step time budgets, index 0 is step 1.
struct StepTimeouts {
  std::array<std::chrono::milliseconds, 12> step;

  static StepTimeouts defaults();
  /// Every step set to `all`.
  static StepTimeouts uniform(std::chrono::milliseconds all);
};

enum class FailureKind { StepFailed, StepTimeout, SessionBroken };

std::string_view failure_kind_name(FailureKind k);

struct StepFailure {
  int step = 0;  // 1..12
  FailureKind kind = FailureKind::StepFailed;
  std::string reason;
};

struct ExtractionResult {
  std::optional<StepFailure> failure;  // empty on success
  std::optional<std::string> log_text;  // present iff success
  Transcript transcript;
  std::string package;

  bool success() const { return !failure.has_value(); }
};

/// Runs the twelve-step procedure: snapshot and boot, exerciser check,
/// package name, root, install and launch, settle, pid and tracer attach,
/// random events, then broadcast-and-interact for every scheduled event,
/// kill, pull the log and uninstall. Any failure aborts at that step; an
/// uninstall is still attempted once the package name is known.
ExtractionResult run_protocol(DeviceSession& session, const std::string& apk_ref,
                              const EventSchedule& schedule, int random_event_count = 500,
                              const StepTimeouts& timeouts = StepTimeouts::defaults());

std::string transcript_tsv(const Transcript& transcript);
nlohmann::ordered_json extraction_status_json(const ExtractionResult& result);

/// Writes trace.log (success only), transcript.tsv and status.json.
void write_extraction_result(const ExtractionResult& result, const std::filesystem::path& dir);

}  // namespace sysdetect
