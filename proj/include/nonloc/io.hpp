// JSON encoding of kets, product states, OPSs, brute verdicts, proof scripts
// and certificates. decode(encode(x)) re-encodes to the same bytes.
#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonloc/constructions.hpp"
#include "nonloc/lemma_engine.hpp"
#include "nonloc/povm_checker.hpp"
#include "nonloc/states.hpp"

namespace nonloc::io {

using json = nlohmann::json;

/// Malformed or inconsistent input document.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw FormatError(std::string("expected an object with field '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

inline json complex_pair(complex z) { return json::array({z.real(), z.imag()}); }

inline complex parse_complex(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError("amplitude must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json coords(const std::vector<Coord>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back(c);
  return a;
}

inline std::vector<Coord> parse_coords(const json& j, const char* key) {
  return get<std::vector<Coord>>(j, key);
}

template <class Fn>
auto wrap(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

inline json encode(const Ket& k) {
  json amps = json::array();
  for (auto z : k.amplitudes()) amps.push_back(detail::complex_pair(z));
  return {{"dim", k.dim()}, {"amps", std::move(amps)}};
}

inline Ket decode_ket(const json& j) {
  const int dim = detail::get<int>(j, "dim");
  const auto& a = detail::field(j, "amps");
  if (!a.is_array() || static_cast<int>(a.size()) != dim) throw FormatError("ket: amps length differs from dim");
  std::vector<complex> amps;
  for (const auto& z : a) amps.push_back(detail::parse_complex(z));
  return detail::wrap("ket", [&] { return Ket(std::move(amps)); });
}

inline json encode(const ProductState& s) {
  json parties = json::array();
  for (const auto& k : s.parties()) parties.push_back(encode(k));
  return {{"parties", std::move(parties)}, {"label", s.label() ? json(s.label()->str()) : json(nullptr)}};
}

inline ProductState decode_state(const json& j) {
  const auto& p = detail::field(j, "parties");
  if (!p.is_array() || p.empty()) throw FormatError("state: parties must be a non-empty array");
  std::vector<Ket> kets;
  for (const auto& k : p) kets.push_back(decode_ket(k));
  std::optional<StateLabel> label;
  const auto& l = detail::field(j, "label");
  if (!l.is_null()) {
    if (!l.is_string()) throw FormatError("state: label must be a string or null");
    label = detail::wrap("label", [&] { return StateLabel::parse(l.get<std::string>()); });
  }
  return detail::wrap("state", [&] { return ProductState(std::move(kets), std::move(label)); });
}

inline json encode(const Block& b) {
  json roles = json::array();
  for (const auto& r : b.roles) roles.push_back(r.str());
  return {{"id", b.id}, {"roles", std::move(roles)}, {"dims", b.dims}};
}

inline Block decode_block(const json& j) {
  const auto id = detail::get<std::string>(j, "id");
  std::vector<PartyRole> roles;
  for (const auto& r : detail::get<std::vector<std::string>>(j, "roles"))
    roles.push_back(detail::wrap("block role", [&] { return PartyRole::parse(r); }));
  auto dims = detail::get<Dims>(j, "dims");
  return detail::wrap("block", [&] { return Block(id, std::move(roles), std::move(dims)); });
}

inline json encode(const OPS& ops) {
  json blocks = json::array(), states = json::array();
  for (const auto& b : ops.blocks) blocks.push_back(encode(b));
  for (const auto& s : ops.states) states.push_back(encode(s));
  return {{"name", ops.name}, {"dims", ops.dims}, {"blocks", std::move(blocks)}, {"states", std::move(states)}};
}

/// Parses and checks shape consistency: every state has one ket per party
/// of the right dimension, and blocks agree with the party count.
inline OPS decode_ops(const json& j) {
  OPS ops;
  ops.name = j.contains("name") ? detail::get<std::string>(j, "name") : std::string("ops");
  ops.dims = detail::get<Dims>(j, "dims");
  if (ops.dims.size() < 2) throw FormatError("ops: need at least two parties");
  for (int d : ops.dims)
    if (d < 1) throw FormatError("ops: dimensions must be positive");
  const auto& blocks = detail::field(j, "blocks");
  const auto& states = detail::field(j, "states");
  if (!blocks.is_array() || !states.is_array()) throw FormatError("ops: blocks and states must be arrays");
  for (const auto& b : blocks) {
    ops.blocks.push_back(decode_block(b));
    if (ops.blocks.back().party_count() != ops.dims.size()) throw FormatError("ops: block party count mismatch");
  }
  for (const auto& s : states) {
    ops.states.push_back(decode_state(s));
    const auto d = ops.states.back().dims();
    if (d != ops.dims) throw FormatError("ops: state " + std::to_string(ops.states.size() - 1) + " has wrong dims");
  }
  return ops;
}

inline json encode(const HermitianMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.n; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.n; ++c) row.push_back(detail::complex_pair(m.at(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json encode(const MeasuringGroup& g) {
  return {{"name", g.name()}, {"excluded", g.excluded}, {"parties", g.parties}, {"member_dims", g.member_dims},
          {"joint_dim", g.joint_dim}};
}

inline MeasuringGroup decode_group(const json& j) {
  MeasuringGroup g;
  g.excluded = detail::get<std::size_t>(j, "excluded");
  g.parties = detail::get<std::vector<std::size_t>>(j, "parties");
  g.member_dims = detail::get<Dims>(j, "member_dims");
  g.joint_dim = detail::get<std::size_t>(j, "joint_dim");
  if (g.parties.size() != g.member_dims.size()) throw FormatError("group: parties and member_dims differ in length");
  std::size_t n = 1;
  for (int d : g.member_dims) {
    if (d < 1) throw FormatError("group: dimensions must be positive");
    n *= static_cast<std::size_t>(d);
  }
  if (n != g.joint_dim) throw FormatError("group: joint_dim is not the product of member_dims");
  return g;
}

inline json encode(const TrivialityVerdict& v) {
  return {{"group", v.group.name()},
          {"excluded", v.group.excluded},
          {"joint_dim", v.group.joint_dim},
          {"nullity", v.nullity},
          {"trivial", v.trivial},
          {"dense_nullity", v.dense_nullity ? json(*v.dense_nullity) : json(nullptr)},
          {"rows", v.rows},
          {"identity_residual", v.identity_residual},
          {"witness", v.witness ? encode(*v.witness) : json(nullptr)}};
}

inline json encode(const ProofStep& s) {
  json fams = json::array();
  for (const auto& f : s.families) fams.push_back({{"block", f.block}, {"family_index", f.family_index}});
  return {{"rule", rule_name(s.rule)},
          {"party", s.party},
          {"families", std::move(fams)},
          {"u_t", s.u_t ? json(*s.u_t) : json(nullptr)},
          {"set_p", detail::coords(s.set_p)},
          {"set_q", detail::coords(s.set_q)},
          {"note", s.note}};
}

/// Only "rule" and "party" are required; hand-written scripts may omit the rest.
inline ProofStep decode_step(const json& j) {
  ProofStep s;
  s.rule = detail::wrap("step", [&] { return parse_rule(detail::get<std::string>(j, "rule")); });
  s.party = detail::get<std::size_t>(j, "party");
  if (j.contains("families"))
    for (const auto& f : detail::field(j, "families"))
      s.families.push_back({detail::get<std::string>(f, "block"),
                            f.contains("family_index") ? detail::get<int>(f, "family_index") : 0});
  if (j.contains("u_t") && !j["u_t"].is_null()) s.u_t = detail::get<Coord>(j, "u_t");
  if (j.contains("set_p")) s.set_p = detail::parse_coords(j, "set_p");
  if (j.contains("set_q")) s.set_q = detail::parse_coords(j, "set_q");
  if (j.contains("note")) s.note = detail::get<std::string>(j, "note");
  return s;
}

inline json encode(const std::vector<ProofStep>& steps) {
  json a = json::array();
  for (const auto& s : steps) a.push_back(encode(s));
  return a;
}

inline std::vector<ProofStep> decode_script(const json& j) {
  if (!j.is_array()) throw FormatError("script must be a JSON array of steps");
  std::vector<ProofStep> out;
  for (const auto& s : j) out.push_back(decode_step(s));
  return out;
}

/// Splits a flat script by the party each step names.
inline std::map<std::size_t, std::vector<ProofStep>> split_by_party(const std::vector<ProofStep>& steps) {
  std::map<std::size_t, std::vector<ProofStep>> out;
  for (const auto& s : steps) out[s.party].push_back(s);
  return out;
}

inline json encode(const HypothesisRecord& h) {
  return {{"name", h.name}, {"value", h.value}, {"relation", h.relation}, {"bound", h.bound}, {"holds", h.holds}};
}

inline json encode(const LogEntry& e) {
  json hyps = json::array();
  for (const auto& h : e.hypotheses) hyps.push_back(encode(h));
  return {{"step", e.step_index},
          {"rule", rule_name(e.rule)},
          {"description", e.description},
          {"set_s", e.set_s},
          {"set_t", e.set_t},
          {"u_t", e.u_t ? json(*e.u_t) : json(nullptr)},
          {"hypotheses", std::move(hyps)},
          {"conclusion", e.conclusion}};
}

inline LogEntry decode_log_entry(const json& j) {
  LogEntry e;
  e.step_index = detail::get<std::size_t>(j, "step");
  e.rule = detail::wrap("log", [&] { return parse_rule(detail::get<std::string>(j, "rule")); });
  e.description = detail::get<std::string>(j, "description");
  e.set_s = detail::get<std::vector<std::size_t>>(j, "set_s");
  e.set_t = detail::get<std::vector<std::size_t>>(j, "set_t");
  if (!detail::field(j, "u_t").is_null()) e.u_t = detail::get<std::size_t>(j, "u_t");
  for (const auto& h : detail::field(j, "hypotheses"))
    e.hypotheses.push_back({detail::get<std::string>(h, "name"), detail::get<double>(h, "value"),
                            detail::get<std::string>(h, "relation"), detail::get<double>(h, "bound"),
                            detail::get<bool>(h, "holds")});
  e.conclusion = detail::get<std::string>(j, "conclusion");
  return e;
}

inline json encode(const ProofCertificate& c) {
  json log = json::array();
  for (const auto& e : c.log) log.push_back(encode(e));
  json failure = nullptr;
  if (c.failure)
    failure = {{"step", c.failure->step_index},
               {"rule", c.failure->rule},
               {"hypothesis", c.failure->hypothesis},
               {"message", c.failure->message}};
  return {{"ops", c.ops_name},
          {"group", encode(c.group)},
          {"policy", {{"zero_tol", c.policy.zero_tol}, {"rank_tol", c.policy.rank_tol}}},
          {"valid", c.valid},
          {"conclusion", c.valid ? "E ∝ I on the full basis" : "not reached"},
          {"failure", std::move(failure)},
          {"classes_at_end", c.classes_at_end},
          {"open_pairs_at_end", c.open_pairs_at_end},
          {"steps", encode(c.steps)},
          {"log", std::move(log)}};
}

inline ProofCertificate decode_certificate(const json& j) {
  ProofCertificate c;
  c.ops_name = detail::get<std::string>(j, "ops");
  c.group = decode_group(detail::field(j, "group"));
  const auto& p = detail::field(j, "policy");
  c.policy = {detail::get<double>(p, "zero_tol"), detail::get<double>(p, "rank_tol")};
  detail::wrap("policy", [&] {
    c.policy.validate();
    return 0;
  });
  c.valid = detail::get<bool>(j, "valid");
  const auto& f = detail::field(j, "failure");
  if (!f.is_null())
    c.failure = ProofFailure{detail::get<std::size_t>(f, "step"), detail::get<std::string>(f, "rule"),
                             detail::get<std::string>(f, "hypothesis"), detail::get<std::string>(f, "message")};
  c.classes_at_end = detail::get<std::size_t>(j, "classes_at_end");
  c.open_pairs_at_end = detail::get<std::size_t>(j, "open_pairs_at_end");
  c.steps = decode_script(detail::field(j, "steps"));
  for (const auto& e : detail::field(j, "log")) c.log.push_back(decode_log_entry(e));
  return c;
}

/// Canonical text form: two-space indentation and a trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace nonloc::io
