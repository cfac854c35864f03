#ifndef FEMTONET_HANDOVERFLOW_HPP
#define FEMTONET_HANDOVERFLOW_HPP

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "femtonet/common.hpp"

namespace femtonet {

enum class Role { ue, serving_fap, target_fap, fgw, cn, rnc, macro_bs };

inline std::string to_string(Role r) {
  switch (r) {
  case Role::ue: return "UE";
  case Role::serving_fap: return "S-FAP";
  case Role::target_fap: return "T-FAP";
  case Role::fgw: return "FGW";
  case Role::cn: return "CN";
  case Role::rnc: return "RNC";
  case Role::macro_bs: return "macro-BS";
  }
  return "?";
}

inline bool is_fap(Role r) { return r == Role::serving_fap || r == Role::target_fap; }

enum class Phase {
  measurement,
  scan,
  son_config,
  pre_authentication,
  decision,
  request,
  authorization,
  admission,
  response,
  link_setup,
  forwarding,
  reestablish,
  detach,
  synchronize,
  complete,
  link_delete,
};

inline std::string to_string(Phase p) {
  switch (p) {
  case Phase::measurement: return "measurement-report";
  case Phase::scan: return "neighbor-scan";
  case Phase::son_config: return "son-config";
  case Phase::pre_authentication: return "pre-authentication";
  case Phase::decision: return "handover-decision";
  case Phase::request: return "handover-request";
  case Phase::authorization: return "authorization";
  case Phase::admission: return "cac-rrc";
  case Phase::response: return "handover-response";
  case Phase::link_setup: return "link-setup";
  case Phase::forwarding: return "data-forwarding";
  case Phase::reestablish: return "channel-reestablish";
  case Phase::detach: return "detach";
  case Phase::synchronize: return "synchronize";
  case Phase::complete: return "handover-complete";
  case Phase::link_delete: return "old-link-delete";
  }
  return "?";
}

struct FlowStep {
  int number = 0;
  Role sender = Role::ue;
  Role receiver = Role::ue;
  Phase kind = Phase::measurement;
};

enum class FlowKind { femto_to_macro, macro_to_femto, femto_to_femto };

inline std::string to_string(FlowKind k) {
  switch (k) {
  case FlowKind::femto_to_macro: return "femto-to-macro";
  case FlowKind::macro_to_femto: return "macro-to-femto";
  case FlowKind::femto_to_femto: return "femto-to-femto";
  }
  return "?";
}

enum class FlowOutcome { completed, rejected_at_cac, rejected_at_authorization, aborted };

inline std::string to_string(FlowOutcome o) {
  switch (o) {
  case FlowOutcome::completed: return "completed";
  case FlowOutcome::rejected_at_cac: return "rejected-at-CAC";
  case FlowOutcome::rejected_at_authorization: return "rejected-at-authorization";
  case FlowOutcome::aborted: return "aborted";
  }
  return "?";
}

struct FlowTrace {
  FlowKind kind = FlowKind::femto_to_macro;
  std::vector<FlowStep> steps;
  FlowOutcome outcome = FlowOutcome::completed;
  std::string diagnostic;
  int cac_calls = 0;
  int authorization_calls = 0;

  bool has(Phase p) const {
    for (const auto &s : steps)
      if (s.kind == p) return true;
    return false;
  }
};

// A decision hook answers yes/no; an empty optional means it did not answer in time.
using DecisionHook = std::function<std::optional<bool>()>;

struct FlowHooks {
  DecisionHook admit;     // CAC and RRC at the target
  DecisionHook authorize; // closed-access check at a target FAP
  std::function<void(const FlowStep &)> on_step;
};

namespace detail {

inline std::vector<FlowStep> make_template(std::initializer_list<std::tuple<Role, Role, Phase>> rows) {
  std::vector<FlowStep> out;
  int n = 0;
  for (const auto &[a, b, k] : rows) out.push_back({++n, a, b, k});
  return out;
}

} // namespace detail

inline const std::vector<FlowStep> &flow_template(FlowKind kind) {
  using R = Role;
  using P = Phase;
  static const std::vector<FlowStep> f2m = detail::make_template({
      {R::ue, R::serving_fap, P::measurement},      {R::serving_fap, R::ue, P::measurement},
      {R::ue, R::macro_bs, P::scan},                {R::ue, R::serving_fap, P::son_config},
      {R::serving_fap, R::ue, P::son_config},       {R::ue, R::macro_bs, P::pre_authentication},
      {R::ue, R::serving_fap, P::decision},         {R::serving_fap, R::fgw, P::request},
      {R::fgw, R::cn, P::request},                  {R::cn, R::rnc, P::request},
      {R::rnc, R::macro_bs, P::request},            {R::macro_bs, R::macro_bs, P::admission},
      {R::macro_bs, R::rnc, P::response},           {R::rnc, R::cn, P::response},
      {R::cn, R::fgw, P::response},                 {R::fgw, R::serving_fap, P::response},
      {R::cn, R::rnc, P::link_setup},               {R::rnc, R::macro_bs, P::link_setup},
      {R::macro_bs, R::rnc, P::link_setup},         {R::rnc, R::cn, P::link_setup},
      {R::serving_fap, R::ue, P::link_setup},       {R::fgw, R::macro_bs, P::forwarding},
      {R::ue, R::macro_bs, P::reestablish},         {R::macro_bs, R::ue, P::reestablish},
      {R::ue, R::serving_fap, P::detach},           {R::ue, R::macro_bs, P::synchronize},
      {R::macro_bs, R::ue, P::synchronize},         {R::ue, R::macro_bs, P::complete},
      {R::macro_bs, R::cn, P::complete},            {R::cn, R::fgw, P::complete},
      {R::fgw, R::serving_fap, P::link_delete},     {R::serving_fap, R::fgw, P::link_delete},
      {R::fgw, R::cn, P::link_delete},
  });
  static const std::vector<FlowStep> m2f = detail::make_template({
      {R::ue, R::macro_bs, P::measurement},         {R::macro_bs, R::ue, P::measurement},
      {R::ue, R::macro_bs, P::son_config},          {R::macro_bs, R::ue, P::son_config},
      {R::ue, R::target_fap, P::pre_authentication}, {R::ue, R::macro_bs, P::decision},
      {R::macro_bs, R::rnc, P::request},            {R::rnc, R::cn, P::request},
      {R::cn, R::fgw, P::request},                  {R::fgw, R::target_fap, P::request},
      {R::target_fap, R::fgw, P::authorization},    {R::fgw, R::target_fap, P::authorization},
      {R::target_fap, R::target_fap, P::admission}, {R::target_fap, R::fgw, P::response},
      {R::fgw, R::cn, P::response},                 {R::cn, R::rnc, P::response},
      {R::rnc, R::macro_bs, P::response},           {R::cn, R::fgw, P::link_setup},
      {R::fgw, R::target_fap, P::link_setup},       {R::target_fap, R::fgw, P::link_setup},
      {R::fgw, R::cn, P::link_setup},               {R::macro_bs, R::ue, P::link_setup},
      {R::fgw, R::target_fap, P::forwarding},       {R::ue, R::target_fap, P::reestablish},
      {R::target_fap, R::ue, P::reestablish},       {R::ue, R::macro_bs, P::detach},
      {R::ue, R::target_fap, P::synchronize},       {R::target_fap, R::ue, P::synchronize},
      {R::ue, R::target_fap, P::complete},          {R::target_fap, R::fgw, P::complete},
      {R::fgw, R::rnc, P::complete},                {R::rnc, R::macro_bs, P::link_delete},
      {R::macro_bs, R::rnc, P::link_delete},        {R::rnc, R::cn, P::link_delete},
  });
  static const std::vector<FlowStep> f2f = detail::make_template({
      {R::ue, R::serving_fap, P::measurement},      {R::serving_fap, R::ue, P::measurement},
      {R::ue, R::target_fap, P::scan},              {R::ue, R::serving_fap, P::son_config},
      {R::serving_fap, R::ue, P::son_config},       {R::ue, R::target_fap, P::pre_authentication},
      {R::ue, R::serving_fap, P::decision},         {R::serving_fap, R::fgw, P::request},
      {R::fgw, R::target_fap, P::request},          {R::target_fap, R::fgw, P::authorization},
      {R::fgw, R::target_fap, P::authorization},    {R::target_fap, R::target_fap, P::admission},
      {R::target_fap, R::fgw, P::response},         {R::fgw, R::serving_fap, P::response},
      {R::fgw, R::target_fap, P::link_setup},       {R::target_fap, R::fgw, P::link_setup},
      {R::serving_fap, R::ue, P::link_setup},       {R::fgw, R::target_fap, P::forwarding},
      {R::ue, R::target_fap, P::reestablish},       {R::target_fap, R::ue, P::reestablish},
      {R::ue, R::serving_fap, P::detach},           {R::ue, R::target_fap, P::synchronize},
      {R::target_fap, R::ue, P::synchronize},       {R::ue, R::target_fap, P::complete},
      {R::target_fap, R::fgw, P::complete},         {R::fgw, R::cn, P::complete},
      {R::fgw, R::serving_fap, P::link_delete},     {R::serving_fap, R::fgw, P::link_delete},
      {R::fgw, R::cn, P::link_delete},
  });
  switch (kind) {
  case FlowKind::femto_to_macro: return f2m;
  case FlowKind::macro_to_femto: return m2f;
  case FlowKind::femto_to_femto: return f2f;
  }
  throw InvalidArgument("unknown flow kind");
}

// Walks the template, consulting the hooks at the authorization and admission steps.
// A refusal or a missing answer ends the trace at the step that asked.
inline FlowTrace run_flow(FlowKind kind, const FlowHooks &hooks) {
  FlowTrace t;
  t.kind = kind;
  const auto &tpl = flow_template(kind);
  bool auth_done = false;
  for (const auto &s : tpl) {
    t.steps.push_back(s);
    if (hooks.on_step) hooks.on_step(s);
    std::optional<bool> verdict;
    FlowOutcome refusal = FlowOutcome::completed;
    // The authorization verdict is known once its last message arrives.
    bool last_auth = s.kind == Phase::authorization && (s.number == static_cast<int>(tpl.size()) || tpl[s.number].kind != Phase::authorization);
    if (last_auth && !auth_done) {
      auth_done = true;
      ++t.authorization_calls;
      verdict = hooks.authorize ? hooks.authorize() : std::optional<bool>(true);
      refusal = FlowOutcome::rejected_at_authorization;
    } else if (s.kind == Phase::admission) {
      ++t.cac_calls;
      verdict = hooks.admit ? hooks.admit() : std::optional<bool>(true);
      refusal = FlowOutcome::rejected_at_cac;
    } else {
      continue;
    }
    if (!verdict) {
      t.outcome = FlowOutcome::aborted;
      t.diagnostic = "no " + to_string(s.kind) + " answer at step " + std::to_string(s.number);
      return t;
    }
    if (!*verdict) {
      t.outcome = refusal;
      t.diagnostic = to_string(s.kind) + " refused at step " + std::to_string(s.number);
      return t;
    }
  }
  t.outcome = FlowOutcome::completed;
  return t;
}

inline FlowTrace run_femto_to_macro(const FlowHooks &h) { return run_flow(FlowKind::femto_to_macro, h); }
inline FlowTrace run_macro_to_femto(const FlowHooks &h) { return run_flow(FlowKind::macro_to_femto, h); }
inline FlowTrace run_femto_to_femto(const FlowHooks &h) { return run_flow(FlowKind::femto_to_femto, h); }

// Ordering audit; returns one message per violated rule.
inline std::vector<std::string> check_trace(const FlowTrace &t) {
  std::vector<std::string> bad;
  const auto &tpl = flow_template(t.kind);
  auto first = [&](Phase p) {
    for (const auto &s : t.steps)
      if (s.kind == p) return s.number;
    return -1;
  };
  auto last = [&](Phase p) {
    int n = -1;
    for (const auto &s : t.steps)
      if (s.kind == p) n = s.number;
    return n;
  };
  if (t.steps.size() > tpl.size()) bad.push_back("trace longer than its template");
  for (std::size_t i = 0; i < t.steps.size() && i < tpl.size(); ++i) {
    const auto &a = t.steps[i], &b = tpl[i];
    if (a.number != b.number || a.sender != b.sender || a.receiver != b.receiver || a.kind != b.kind) {
      bad.push_back("step " + std::to_string(a.number) + " departs from the template");
      break;
    }
    if (i > 0 && a.number <= t.steps[i - 1].number) bad.push_back("step numbers not increasing at " + std::to_string(a.number));
  }
  for (const auto &s : t.steps)
    if (is_fap(s.sender) && is_fap(s.receiver) && s.sender != s.receiver) bad.push_back("step " + std::to_string(s.number) + " links two FAPs without the FGW");
  if (first(Phase::forwarding) > 0 && first(Phase::detach) > 0 && first(Phase::forwarding) > first(Phase::detach)) bad.push_back("detach before data forwarding");
  if (first(Phase::link_delete) > 0 && (last(Phase::complete) < 0 || first(Phase::link_delete) < last(Phase::complete))) bad.push_back("old link deleted before handover complete");
  if (t.kind == FlowKind::femto_to_macro) {
    if (first(Phase::authorization) > 0 || t.authorization_calls > 0) bad.push_back("authorization in a flow towards the macrocell");
  } else if (first(Phase::admission) > 0 && (last(Phase::authorization) < 0 || last(Phase::authorization) > first(Phase::admission))) {
    bad.push_back("admission before authorization");
  }
  if (t.outcome == FlowOutcome::completed) {
    if (t.steps.size() != tpl.size()) bad.push_back("completed trace is truncated");
    // Data path count at the end: the new link comes up, the old one goes away.
    int paths = 1 + (first(Phase::link_setup) > 0 ? 1 : 0) - (first(Phase::link_delete) > 0 ? 1 : 0);
    if (paths != 1) bad.push_back("completed trace ends with " + std::to_string(paths) + " data paths");
  } else {
    if (first(Phase::link_setup) > 0) bad.push_back("link set up after a refusal");
    if (t.outcome == FlowOutcome::rejected_at_authorization && t.cac_calls > 0) bad.push_back("CAC consulted after an authorization refusal");
  }
  return bad;
}

// Every combination of yes / no / silent answers from the two hooks.
inline std::vector<FlowTrace> enumerate_branches(FlowKind kind) {
  const std::optional<bool> answers[] = {true, false, std::nullopt};
  std::vector<FlowTrace> out;
  for (auto a : answers)
    for (auto c : answers) {
      FlowHooks h;
      h.authorize = [a] { return a; };
      h.admit = [c] { return c; };
      out.push_back(run_flow(kind, h));
    }
  return out;
}

inline std::string to_csv(const FlowTrace &t) {
  std::ostringstream os;
  os << "step,sender,receiver,kind\n";
  for (const auto &s : t.steps) os << s.number << ',' << to_string(s.sender) << ',' << to_string(s.receiver) << ',' << to_string(s.kind) << '\n';
  return os.str();
}

inline std::string to_log(const FlowTrace &t) {
  std::ostringstream os;
  os << to_string(t.kind) << '\n';
  for (const auto &s : t.steps) {
    os << "  " << s.number << ". " << to_string(s.sender);
    if (s.sender == s.receiver)
      os << " [" << to_string(s.kind) << "]\n";
    else
      os << " -> " << to_string(s.receiver) << ": " << to_string(s.kind) << '\n';
  }
  os << "outcome: " << to_string(t.outcome);
  if (!t.diagnostic.empty()) os << " (" << t.diagnostic << ')';
  os << '\n';
  return os.str();
}

} // namespace femtonet

#endif
