/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
// Usage: acceptance <lifetaint-cli> <unit-tests-binary>

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lifetaint/driver.h"
#include "lifetaint/taint_engine.h"
#include "test_support.h"

namespace {

using namespace lifetaint;
using lifetaint::testing::corpus_app;
using lifetaint::testing::data_path;
using lifetaint::testing::default_config;
using lifetaint::testing::model;
using lifetaint::testing::model_for;
using Names = std::vector<std::string>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      failures.push_back(what);
    }
  }
};

bool report(int id, const std::string& title, const Check& c,
            const std::string& detail) {
  bool ok = c.failures.empty();
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << title
            << " (" << detail << ")";
  for (const auto& f : c.failures) {
    std::cout << "\n    " << f;
  }
  std::cout << std::endl;
  return ok;
}

std::string method_name(const std::string& signature) {
  return parse_signature(signature).method;
}

bool has_leak(const std::vector<Warning>& ws, const std::string& source,
              const std::string& sink) {
  for (const auto& w : ws) {
    if (w.kind == WarningKind::InfoLeak && w.sink_api == sink &&
        w.source_apis.count(source)) {
      return true;
    }
  }
  return false;
}

size_t count_kind(const std::vector<Warning>& ws, WarningKind kind) {
  size_t n = 0;
  for (const auto& w : ws) {
    n += w.kind == kind ? 1 : 0;
  }
  return n;
}

const ModelSet& models() {
  static const ModelSet set = load_models(data_path("models"));
  return set;
}

Report escalate(const std::string& app, int m_max) {
  RunConfig run;
  run.m_max = m_max;
  return analyze_app(data_path("corpus/" + app + ".app"), models(),
                     default_config(), run);
}

// Criterion 1: derivation counts and service callback dedup.

bool criterion_sequence_counts() {
  Check c;
  auto start = Clock::now();
  auto activity = model("activity");
  auto service = model("service");
  auto act = derive_event_sequences(activity);
  auto svc = derive_event_sequences(service);
  std::set<Names> unique;
  for (const auto& s : svc) {
    unique.insert(s.callbacks());
  }
  double secs = seconds_since(start);
  c.expect(act.size() == 26, "activity sequences " + std::to_string(act.size()));
  c.expect(svc.size() == 15, "service sequences " + std::to_string(svc.size()));
  c.expect(unique.size() == 10,
           "unique service callback sequences " + std::to_string(unique.size()));
  c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
  std::ostringstream d;
  d << "activity=" << act.size() << " service=" << svc.size()
    << " service_unique=" << unique.size() << " in " << secs << " s";
  return report(1, "sequence counts", c, d.str());
}

// Criterion 2: the motivating example.

bool criterion_motivating_example() {
  Check c;
  auto start = Clock::now();
  auto app = corpus_app("motivating_example");
  const auto& comp = app.components.front();
  const auto& mdl = model_for(comp.kind);
  auto callback_seqs = derive_callback_sequences(mdl, app, comp);
  c.expect(callback_seqs.size() == 12,
           "derive_callback_sequences returned " +
               std::to_string(callback_seqs.size()) + ", expected 12");

  auto one = escalate("motivating_example", 1);
  c.expect(count_kind(one.warnings, WarningKind::InfoLeak) == 0,
           "m=1 reported an information leak");

  const std::string source = "TelephonyManager.getDeviceId/0";
  const std::string sink = "SmsManager.sendTextMessage/5";
  const Names order{"onUserLeaveHint", "onUserLeaveHint", "onSaveInstanceState",
                    "onRestoreInstanceState", "onResume"};
  auto plan = make_plan(mdl, app, comp, 2);
  MWayPermutations perms(plan);
  TaintEngine engine(app, default_config());
  CallbackSequence seq;
  size_t detecting = 0;
  size_t total = 0;
  while (perms.next(seq)) {
    ++total;
    if (!has_leak(engine.analyze_sequence(comp, seq), source, sink)) {
      continue;
    }
    ++detecting;
    Names names;
    for (const auto& s : seq) {
      names.push_back(method_name(s));
    }
    if (!lifetaint::testing::is_subsequence(order, names)) {
      c.failures.push_back("detecting sequence " + std::to_string(total - 1) +
                           " lacks the attack order");
    }
  }
  c.expect(detecting >= 1, "m=2 found no getDeviceId -> sendTextMessage leak");
  auto two = escalate("motivating_example", 2);
  c.expect(has_leak(two.warnings, source, sink) && two.m_reached == 2,
           "escalation did not report the leak at m=2");
  double secs = seconds_since(start);
  c.expect(secs < 10.0, "runtime " + std::to_string(secs) + " s");
  std::ostringstream d;
  d << "callback_sequences=" << callback_seqs.size()
    << " m1_leaks=" << count_kind(one.warnings, WarningKind::InfoLeak)
    << " m2_detecting=" << detecting << "/" << total << " in " << secs << " s";
  return report(2, "motivating example", c, d.str());
}

// Criterion 3: the six event-sequence test apps.

struct AttackRow {
  std::string app;
  Names events;
  std::string source;
  std::string sink;
};

const std::vector<AttackRow>& attack_rows() {
  static const std::vector<AttackRow> rows{
      {"ActivityEveSeq1", {"createActivity"},
       "TelephonyManager.getDeviceId/0", "Log.d/2"},
      {"ActivityEveSeq2",
       {"createActivity", "hideActivityPartially", "savStop", "savRestart",
        "savStop"},
       "TelephonyManager.getLine1Number/0", "Log.i/2"},
      {"ActivityEveSeq3",
       {"createActivity", "hideActivityPartially", "gotoActivity",
        "overlapActivity", "restartActivity", "confPR"},
       "TelephonyManager.getDeviceId/0", "SmsManager.sendTextMessage/5"},
      {"ServiceEveSeq1", {"createAndStart", "bind", "start"},
       "TelephonyManager.getSubscriberId/0", "Log.w/2"},
      {"ServiceEveSeq2", {"createAndStart", "bind", "unbind", "bind"},
       "TelephonyManager.getSimSerialNumber/0", "Log.e/2"},
      {"ServiceEveSeq3", {"createAndBind", "unbindAndDestroy"},
       "LocationManager.getLastKnownLocation/1", "HttpClient.execute/1"},
  };
  return rows;
}

// True if some run of `events` yields the row's leak.
bool events_leak(const AppModel& app, const ComponentDef& comp,
                 const Names& events, const AttackRow& row) {
  for (const auto& run : replay_callbacks(model_for(comp.kind), events,
                                          false)) {
    auto callbacks = lifetaint::testing::resolve_names(app, comp, run);
    auto r = analyze_callback_sequence(app, comp, callbacks, default_config());
    if (has_leak(r.warnings, row.source, row.sink)) {
      return true;
    }
  }
  return false;
}

bool criterion_attack_apps() {
  Check c;
  int found = 0;
  for (const auto& row : attack_rows()) {
    auto app = corpus_app(row.app);
    const auto& comp = app.components.front();
    c.expect(replay_accepts(model_for(comp.kind), row.events),
             row.app + ": event sequence rejected by the model");
    c.expect(events_leak(app, comp, row.events, row),
             row.app + ": event sequence does not leak");
    for (size_t k = 0; k < row.events.size(); ++k) {
      Names prefix(row.events.begin(), row.events.begin() + k);
      c.expect(!events_leak(app, comp, prefix, row),
               row.app + ": a shorter prefix of " +
                   std::to_string(k) + " events already leaks");
    }
    auto rep = escalate(row.app, 2);
    bool ok = has_leak(rep.warnings, row.source, row.sink) && rep.finished;
    c.expect(ok, row.app + ": m<=2 analysis missed " + row.source + " -> " +
                     row.sink);
    found += ok ? 1 : 0;
  }
  return report(3, "event-sequence test apps", c,
                std::to_string(found) + "/6 detected");
}

// Criterion 4: object and flow sensitivity.

std::vector<Warning> run_main(const std::string& app_name,
                              const std::string& sig) {
  auto app = corpus_app(app_name);
  TaintEngine engine(app, default_config());
  const auto* m = app.resolve_method(sig);
  if (m == nullptr) {
    return {};
  }
  engine.analyze_method(*m, std::nullopt, {});
  return engine.take_warnings();
}

bool criterion_sensitivity() {
  Check c;
  auto obj = run_main("obj_sensitivity", "ObjSens.main/0");
  c.expect(obj.size() == 1 && count_kind(obj, WarningKind::InfoLeak) == 1,
           "object sensitivity warnings " + std::to_string(obj.size()));
  auto flow = run_main("flow_sensitivity", "FlowSens.main/0");
  std::multiset<int> sinks;
  for (const auto& w : flow) {
    for (const auto& loc : w.locations) {
      if (loc.role == "sink") {
        sinks.insert(loc.where.index);
      }
    }
  }
  c.expect(flow.size() == 1, "flow sensitivity warnings " +
                                 std::to_string(flow.size()));
  c.expect(sinks.count(8) == 1, "second sink not reported once");
  c.expect(sinks.count(4) == 0, "first sink reported");
  std::ostringstream d;
  d << "object=" << obj.size() << " flow=" << flow.size()
    << " first_sink=" << sinks.count(4) << " second_sink=" << sinks.count(8);
  return report(4, "sensitivity pair", c, d.str());
}

// Criterion 5: SMS detectors.

bool criterion_sms() {
  Check c;
  auto hard = escalate("motivating_example", 2);
  auto reply = escalate("sms_autoreply", 2);
  auto config = escalate("sms_config_number", 2);
  auto sms = [](const Report& r) {
    return count_kind(r.warnings, WarningKind::SmsHardcoded) +
        count_kind(r.warnings, WarningKind::SmsAutoreply);
  };
  c.expect(count_kind(hard.warnings, WarningKind::SmsHardcoded) >= 1,
           "hard-coded recipient not flagged");
  c.expect(count_kind(reply.warnings, WarningKind::SmsAutoreply) >= 1,
           "auto-reply not flagged");
  c.expect(sms(config) == 0, "configured recipient flagged");
  std::ostringstream d;
  d << "hardcoded=" << count_kind(hard.warnings, WarningKind::SmsHardcoded)
    << " autoreply=" << count_kind(reply.warnings, WarningKind::SmsAutoreply)
    << " config_number=" << sms(config);
  return report(5, "SMS detectors", c, d.str());
}

// Criterion 6: property suites and total suite runtime.

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool criterion_properties(const std::string& unit_tests) {
  Check c;
  const std::vector<std::pair<std::string, std::string>> required{
      {"alias soundness", "Property.AliasSoundnessUpToDepthFive"},
      {"alias soundness", "Property.AliasSoundnessThroughTheEngine"},
      {"merge preservation",
       "Merge.DuplicatedOutPreservesTaintOverwrittenOnSharedObject"},
      {"merge preservation", "Merge.PreservationHoldsWhicheverSideUntaints"},
      {"collection monotonicity", "Property.CollectionTaintIsMonotone"},
      {"recursion termination", "Invoke.RecursionIsCutAndTerminates"},
      {"recursion termination", "Property.EveryCorpusAppTerminates"},
      {"permutation count", "PermutationCount.MatchesBruteForceForSmallN"},
      {"dedup", "Dedup.IdempotentAndOrderInsensitive"},
      {"dedup", "Dedup.OutputIsAnAntichainThatCoversTheInput"},
      {"acyclicity", "Corpus.EveryMethodBecomesAcyclicWithValidOrder"},
      {"acyclicity", "BackEdges.RemovalYieldsDagPreservingReachability"},
      {"forward oracle", "Property.StraightLineMatchesForwardSimulation"},
  };
  auto out = std::filesystem::temp_directory_path() /
      ("lifetaint_acceptance_" + std::to_string(::getpid()) + ".json");
  std::string cmd = "\"" + unit_tests + "\" --gtest_output=json:\"" +
      out.string() + "\" > /dev/null 2>&1";
  auto start = Clock::now();
  int status = std::system(cmd.c_str());
  double secs = seconds_since(start);
  c.expect(status == 0, "unit tests exited with status " +
                            std::to_string(status));
  c.expect(secs < 60.0, "suite runtime " + std::to_string(secs) + " s");

  std::map<std::string, bool> passed;
  int total = 0;
  try {
    auto j = nlohmann::json::parse(read_file(out.string()));
    for (const auto& suite : j.at("testsuites")) {
      for (const auto& t : suite.at("testsuite")) {
        ++total;
        passed[suite.at("name").get<std::string>() + "." +
               t.at("name").get<std::string>()] = !t.contains("failures");
      }
    }
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("cannot read test results: ") + e.what());
  }
  std::filesystem::remove(out);
  for (const auto& [family, name] : required) {
    auto it = passed.find(name);
    c.expect(it != passed.end(), family + ": " + name + " missing");
    c.expect(it == passed.end() || it->second, family + ": " + name + " failed");
  }
  std::ostringstream d;
  d << required.size() << " property tests of " << total << " in " << secs
    << " s";
  return report(6, "property suites", c, d.str());
}

// Criterion 7: byte-identical CLI output across runs.

bool capture(const std::string& cmd, std::string& out, int& status) {
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    return false;
  }
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
    out.append(buf, n);
  }
  status = ::pclose(pipe);
  return true;
}

bool criterion_determinism(const std::string& cli) {
  Check c;
  std::string cmd = "\"" + cli + "\" --app \"" + data_path("corpus") +
      "\" --models \"" + data_path("models") + "\" --config \"" +
      data_path("config/sources_sinks.json") + "\" 2>/dev/null";
  std::string a, b;
  int sa = -1, sb = -1;
  c.expect(capture(cmd, a, sa) && capture(cmd, b, sb), "cannot run the CLI");
  c.expect(sa == 0 && sb == 0, "CLI exit status " + std::to_string(sa) + "/" +
                                   std::to_string(sb));
  c.expect(!a.empty() && nlohmann::json::accept(a), "CLI output is not JSON");
  c.expect(a == b, "outputs differ");
  return report(7, "determinism", c,
                std::to_string(a.size()) + " bytes per run");
}

} // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <lifetaint-cli> <unit-tests-binary>\n";
    return 2;
  }
  auto start = Clock::now();
  bool ok = true;
  ok = criterion_sequence_counts() && ok;
  ok = criterion_motivating_example() && ok;
  ok = criterion_attack_apps() && ok;
  ok = criterion_sensitivity() && ok;
  ok = criterion_sms() && ok;
  ok = criterion_properties(argv[2]) && ok;
  ok = criterion_determinism(argv[1]) && ok;
  std::cout << (ok ? "ALL PASS" : "SOME FAILED") << " in "
            << seconds_since(start) << " s" << std::endl;
  return ok ? 0 : 1;
}
