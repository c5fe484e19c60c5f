// nonloc: construct, verify, certify and draw orthogonal product sets.
//
// Exit codes: 0 success / certified, 1 negative result, 2 usage or input
// error, 3 resource abort.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nonloc/constructions.hpp"
#include "nonloc/io.hpp"
#include "nonloc/lemma_engine.hpp"
#include "nonloc/povm_checker.hpp"
#include "nonloc/report.hpp"

namespace {

using namespace nonloc;
using io::json;

constexpr int kOk = 0, kNegative = 1, kUsage = 2, kResource = 3;

// Brute-force systems above this joint dimension need --allow-long.
constexpr std::size_t kShortJointDim = 32;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

OPS load_ops(const std::string& path) { return io::decode_ops(io::parse(read_file(path))); }

struct Tolerances {
  std::optional<double> zero_tol, rank_tol;

  void add_to(CLI::App* app) {
    app->add_option("--zero-tol", zero_tol, "absolute zero threshold (overrides NONLOC_TOL)");
    app->add_option("--rank-tol", rank_tol, "relative rank threshold");
  }

  TolerancePolicy policy() const {
    TolerancePolicy p = TolerancePolicy::from_env();
    if (zero_tol) p.zero_tol = *zero_tol;
    if (rank_tol) p.rank_tol = *rank_tol;
    p.validate();
    return p;
  }
};

// ---- construct -------------------------------------------------------------

struct ConstructCmd {
  std::size_t parties = 3;
  std::vector<int> dims;
  std::vector<int> pad_to;
  bool basis = false;
  std::string out;

  int run() const {
    if (dims.size() != parties)
      throw UsageError("--dims has " + std::to_string(dims.size()) + " entries but --parties is " +
                       std::to_string(parties));
    OPS ops = basis ? computational_basis(dims) : construct(dims);
    if (!pad_to.empty()) ops = embed(ops, pad_to);
    write_text(out, io::dump(io::encode(ops)));
    auto& log = out.empty() || out == "-" ? std::cerr : std::cout;
    log << ops.name << ": " << ops.states.size() << " states (size formula " << size_formula(ops.dims) << ")";
    if (!out.empty() && out != "-") log << " written to " << out;
    log << '\n';
    return kOk;
  }
};

// ---- verify ----------------------------------------------------------------

struct VerifyCmd {
  std::string in;
  Tolerances tol;

  int run() const {
    const auto policy = tol.policy();
    const OPS ops = load_ops(in);
    bool pass = true;

    double worst = 0.0;
    std::size_t wi = 0, wj = 0;
    for (std::size_t i = 0; i < ops.states.size(); ++i)
      for (std::size_t j = i + 1; j < ops.states.size(); ++j) {
        const double a = std::abs(product_inner(ops.states[i], ops.states[j]));
        if (a > worst) {
          worst = a;
          wi = i;
          wj = j;
        }
      }
    const bool orthogonal = worst < policy.zero_tol;
    pass = pass && orthogonal;
    std::cout << "orthogonality: " << (orthogonal ? "pass" : "FAIL") << "  max |<i|j>| = " << worst << '\n';
    if (!orthogonal) {
      auto name = [&](std::size_t k) {
        const auto& l = ops.states[k].label();
        return std::to_string(k) + (l ? " (" + l->str() + ")" : "");
      };
      std::cout << "  offending pair: " << name(wi) << ", " << name(wj) << '\n';
    }

    const long long expected = size_formula(ops.dims);
    const bool size_ok = static_cast<long long>(ops.states.size()) == expected;
    pass = pass && size_ok;
    std::cout << "size: " << (size_ok ? "pass" : "FAIL") << "  " << ops.states.size() << " states, formula "
              << expected << '\n';

    if (ops.blocks.empty()) {
      std::cout << "decomposition: skipped (no blocks)\n";
    } else {
      const auto v = verify_decomposition(ops.blocks, ops.dims);
      pass = pass && v.ok();
      std::cout << "decomposition: " << (v.ok() ? "pass" : "FAIL") << "  " << v.str() << '\n';
      long long block_states = 0;
      for (const auto& b : ops.blocks) block_states += b.state_count();
      const bool counts = block_states == static_cast<long long>(ops.states.size());
      pass = pass && counts;
      std::cout << "block counts: " << (counts ? "pass" : "FAIL") << "  blocks generate " << block_states
                << " states\n";
    }

    const bool stable = io::dump(io::encode(io::decode_ops(io::encode(ops)))) == io::dump(io::encode(ops));
    pass = pass && stable;
    std::cout << "round trip: " << (stable ? "pass" : "FAIL") << '\n';
    std::cout << (pass ? "verified" : "NOT verified") << '\n';
    return pass ? kOk : kNegative;
  }
};

// ---- check -----------------------------------------------------------------

struct CheckCmd {
  std::string method = "lemma";
  std::string in;
  std::optional<std::size_t> group;
  bool allow_long = false;
  bool general = false;
  std::string script;
  std::string emit_cert;
  std::string out;
  std::size_t max_nnz = 64'000'000;
  Tolerances tol;

  int run() const {
    const auto policy = tol.policy();
    const OPS ops = load_ops(in);
    if (ops.dims.size() < 3) throw UsageError("measuring groups need at least three parties");
    const auto all = measuring_groups(ops.dims);
    std::vector<MeasuringGroup> groups;
    if (group) {
      if (*group >= all.size())
        throw UsageError("--group must lie in [0, " + std::to_string(all.size() - 1) + "]");
      groups.push_back(all[*group]);
    } else {
      groups = all;
    }
    const bool brute = method == "brute" || method == "both";
    const bool lemma = method == "lemma" || method == "both";
    if (general && !brute) throw UsageError("--general applies to the brute method only");

    if (brute && !allow_long)
      for (const auto& g : groups)
        if (g.joint_dim > kShortJointDim)
          throw ResourceAbort("group " + g.name() + " has joint dimension " + std::to_string(g.joint_dim) +
                              " > " + std::to_string(kShortJointDim) +
                              "; use --method lemma, or pass --allow-long to run the brute-force check anyway");

    std::map<std::size_t, std::vector<ProofStep>> scripts;
    if (lemma) {
      if (!script.empty()) {
        scripts = io::split_by_party(io::decode_script(io::parse(read_file(script))));
      } else if (ops.blocks.empty()) {
        throw UsageError("OPS has no block structure; supply --script for the lemma method");
      }
    }

    json result{{"ops", ops.name}, {"method", method}};
    bool certified = true;
    std::vector<bool> brute_ok, lemma_ok;

    if (brute) {
      json verdicts = json::array();
      BruteOptions opts;
      opts.max_nnz = max_nnz;
      for (const auto& g : groups) {
        try {
          const auto v = check_group(ops, g, policy, opts);
          json jv = io::encode(v);
          if (general) {
            BruteOptions gen = opts;
            gen.param = Parametrization::General;
            gen.dense_crosscheck = false;
            const auto gv = check_group(ops, g, policy, gen);
            jv["general"] = {{"nullity", gv.nullity}, {"trivial", gv.trivial}, {"certifying", false}};
          }
          verdicts.push_back(std::move(jv));
          brute_ok.push_back(v.trivial);
          certified = certified && v.trivial;
          std::cerr << "brute " << g.name() << ": nullity " << v.nullity << (v.trivial ? " trivial" : " NOT trivial")
                    << '\n';
        } catch (const ResourceLimitError& e) {
          throw ResourceAbort(std::string(e.what()) + "; raise --max-nnz or use --method lemma");
        }
      }
      result["brute"] = std::move(verdicts);
    }

    if (lemma) {
      json summaries = json::array(), certs = json::array();
      for (const auto& g : groups) {
        std::vector<ProofStep> steps;
        if (script.empty()) {
          steps = script_for(ops, g);
        } else if (auto it = scripts.find(g.excluded); it != scripts.end()) {
          steps = it->second;
        }
        const auto cert = nonloc::run(ops, g, steps, policy);
        lemma_ok.push_back(cert.valid);
        certified = certified && cert.valid;
        json s{{"group", g.name()}, {"excluded", g.excluded}, {"valid", cert.valid}, {"steps", cert.steps.size()}};
        if (cert.failure)
          s["failure"] = {{"step", cert.failure->step_index},
                          {"rule", cert.failure->rule},
                          {"hypothesis", cert.failure->hypothesis},
                          {"message", cert.failure->message}};
        else
          s["failure"] = nullptr;
        summaries.push_back(std::move(s));
        if (!emit_cert.empty()) certs.push_back(io::encode(cert));
        std::cerr << "lemma " << g.name() << ": " << (cert.valid ? "valid" : "INVALID") << " certificate, "
                  << cert.steps.size() << " steps";
        if (cert.failure) std::cerr << " (" << cert.failure->hypothesis << ": " << cert.failure->message << ")";
        std::cerr << '\n';
      }
      result["lemma"] = std::move(summaries);
      if (!emit_cert.empty()) write_text(emit_cert, io::dump(json{{"certificates", std::move(certs)}}));
    }

    int code = certified ? kOk : kNegative;
    if (brute && lemma) {
      const bool agree = brute_ok == lemma_ok;
      result["agree"] = agree;
      if (!agree) {
        std::cerr << "DISAGREEMENT between brute-force and lemma verdicts\n";
        code = kNegative;
      }
    }
    result["certified"] = certified && code == kOk;
    write_text(out, io::dump(result));
    return code;
  }
};

// ---- script / recheck / report ---------------------------------------------

struct ScriptCmd {
  std::string in;
  std::optional<std::size_t> group;
  std::string out;

  int run() const {
    const OPS ops = load_ops(in);
    if (ops.dims.size() < 3) throw UsageError("measuring groups need at least three parties");
    if (ops.blocks.empty()) throw UsageError("OPS has no block structure to plan from");
    std::vector<ProofStep> steps;
    for (const auto& g : measuring_groups(ops.dims)) {
      if (group && g.excluded != *group) continue;
      const auto s = script_for(ops, g);
      steps.insert(steps.end(), s.begin(), s.end());
    }
    if (group && steps.empty()) throw UsageError("--group out of range");
    write_text(out, io::dump(io::encode(steps)));
    return kOk;
  }
};

struct RecheckCmd {
  std::string cert;

  int run() const {
    const auto doc = io::parse(read_file(cert));
    std::vector<ProofCertificate> certs;
    if (doc.is_object() && doc.contains("certificates")) {
      for (const auto& c : doc["certificates"]) certs.push_back(io::decode_certificate(c));
    } else {
      certs.push_back(io::decode_certificate(doc));
    }
    bool all = true;
    for (const auto& c : certs) {
      const auto r = recheck(c);
      std::cout << c.ops_name << " " << c.group.name() << ": " << (r.ok ? "consistent" : "REJECTED") << ", "
                << (c.valid ? "valid" : "invalid") << " (" << r.message << ")\n";
      all = all && r.ok && c.valid;
    }
    return all ? kOk : kNegative;
  }
};

struct ReportCmd {
  std::string in;
  std::size_t parties = 0;
  std::vector<int> dims;
  std::optional<std::size_t> group;

  int run() const {
    OPS ops;
    if (!in.empty()) {
      ops = load_ops(in);
    } else {
      if (dims.empty()) throw UsageError("report needs --in or --dims");
      if (parties && dims.size() != parties) throw UsageError("--dims length does not match --parties");
      ops = construct(dims);
    }
    if (ops.blocks.empty()) throw UsageError("report needs block structure");
    if (group) {
      if (*group >= ops.dims.size()) throw UsageError("--group out of range");
      std::cout << grid_report(ops, *group);
    } else {
      std::cout << full_report(ops);
    }
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthogonal product sets from hypercube outer layers: construction and nonlocality certification"};
  app.require_subcommand(1);

  ConstructCmd construct_cmd;
  auto* c = app.add_subcommand("construct", "build a shipped construction and write it as JSON");
  c->add_option("--parties", construct_cmd.parties, "number of parties")->required()->check(CLI::IsMember({3, 4, 5}));
  c->add_option("--dims", construct_cmd.dims, "local dimensions, e.g. 3,4,5")->required()->delimiter(',');
  c->add_option("--pad-to", construct_cmd.pad_to, "zero-pad every ket into these larger dimensions")->delimiter(',');
  c->add_flag("--basis", construct_cmd.basis, "the full computational product basis instead (negative control)");
  c->add_option("--out", construct_cmd.out, "output file (default stdout)");

  VerifyCmd verify_cmd;
  auto* v = app.add_subcommand("verify", "check orthogonality, size and block decomposition");
  v->add_option("--in", verify_cmd.in, "OPS JSON")->required();
  verify_cmd.tol.add_to(v);

  CheckCmd check_cmd;
  auto* k = app.add_subcommand("check", "decide whether every measuring group admits only trivial POVMs");
  k->add_option("--method", check_cmd.method, "brute, lemma or both")->check(CLI::IsMember({"brute", "lemma", "both"}));
  k->add_option("--in", check_cmd.in, "OPS JSON")->required();
  k->add_option("--group", check_cmd.group, "only the group excluding this party index");
  k->add_flag("--allow-long", check_cmd.allow_long, "permit brute force on joint dimensions above 32");
  k->add_flag("--general", check_cmd.general, "also report the non-Hermitian parametrization (diagnostic)");
  k->add_option("--script", check_cmd.script, "proof script JSON (list of steps) instead of the generated one");
  k->add_option("--emit-cert", check_cmd.emit_cert, "write full certificates with logs to this file");
  k->add_option("--out", check_cmd.out, "write the verdict JSON here instead of stdout");
  k->add_option("--max-nnz", check_cmd.max_nnz, "fill-in budget for sparse elimination");
  check_cmd.tol.add_to(k);

  ScriptCmd script_cmd;
  auto* s = app.add_subcommand("script", "emit the generated proof script as JSON");
  s->add_option("--in", script_cmd.in, "OPS JSON")->required();
  s->add_option("--group", script_cmd.group, "only the group excluding this party index");
  s->add_option("--out", script_cmd.out, "output file (default stdout)");

  RecheckCmd recheck_cmd;
  auto* r = app.add_subcommand("recheck", "re-validate certificates from their logs alone");
  r->add_option("--cert", recheck_cmd.cert, "certificate JSON written by check --emit-cert")->required();

  ReportCmd report_cmd;
  auto* g = app.add_subcommand("report", "print the block grid of every bipartition");
  g->add_option("--in", report_cmd.in, "OPS JSON");
  g->add_option("--parties", report_cmd.parties, "number of parties (with --dims)");
  g->add_option("--dims", report_cmd.dims, "construct on the fly")->delimiter(',');
  g->add_option("--group", report_cmd.group, "only the grid for this excluded party");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*c) return construct_cmd.run();
    if (*v) return verify_cmd.run();
    if (*k) return check_cmd.run();
    if (*s) return script_cmd.run();
    if (*r) return recheck_cmd.run();
    if (*g) return report_cmd.run();
  } catch (const ResourceAbort& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource limit: out of memory; use --method lemma\n";
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
