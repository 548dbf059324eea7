#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lueders.hpp"
#include "lueders/battery.hpp"

namespace lueders::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kNoWitness = 2, kInternal = 3 };

namespace detail {

using io::json;

struct Output {
  std::string path;
  std::ostream& out;

  void emit(const std::string& text) const {
    if (path.empty()) {
      out << text;
    } else {
      io::write_file_atomic(path, text);
    }
  }

  void emit(const json& j) const { emit(j.dump(2) + "\n"); }
};

inline void add_tolerance_options(CLI::App* cmd, Tolerances& tol) {
  cmd->add_option("--tol-herm", tol.herm, "Hermiticity tolerance");
  cmd->add_option("--tol-psd", tol.psd, "spectrum slack outside [0,1]");
  cmd->add_option("--tol-orth", tol.orth, "orthonormality tolerance");
  cmd->add_option("--tol-recon", tol.recon, "reconstruction tolerance");
  cmd->add_option("--tol-nullspace", tol.nullspace, "relative singular value cutoff");
  cmd->add_option("--tol-comm", tol.comm, "commutator tolerance");
  cmd->add_option("--tol-norm", tol.norm, "||F - I|| cutoff for a resolution");
  cmd->add_option("--tol-cluster", tol.cluster, "eigenvalue clustering tolerance");
  cmd->add_option("--tol-witness", tol.witness, "nonzero block threshold relative to ||B||");
  cmd->add_option("--tol-subspace", tol.subspace, "projector distance for subspace equality");
}

inline EffectSet load_set(const std::string& path, const Tolerances& tol) {
  return build_effect_set(io::parse_effect_matrices(io::read_file(path)), tol);
}

inline json spectrum_report(const std::vector<ComplexMatrix>& ms, const Tolerances& tol) {
  json effects = json::array();
  for (std::size_t i = 0; i < ms.size(); ++i) {
    json e = {{"index", i}};
    if (ms[i].is_square() && is_hermitian(ms[i], tol.herm)) {
      const auto es = hermitian_eigendecompose(hermitian_part(ms[i]), tol);
      e["min_eigenvalue"] = es.eigenvalues.front();
      e["max_eigenvalue"] = es.eigenvalues.back();
    } else {
      e["hermitian"] = false;
    }
    effects.push_back(std::move(e));
  }
  return effects;
}

inline json commutator_report(const std::vector<ComplexMatrix>& ms) {
  json pairs = json::array();
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      pairs.push_back({{"i", i}, {"j", j}, {"norm", operator_norm(commutator(ms[i], ms[j]))}});
    }
  }
  return pairs;
}

inline json square_sum_report(const std::vector<ComplexMatrix>& ms) {
  ComplexMatrix f(ms.front().rows(), ms.front().cols());
  for (const auto& m : ms) f += m * m;
  const auto es = hermitian_eigendecompose(hermitian_part(f));
  return {{"max_eigenvalue", es.eigenvalues.back()},
          {"distance_to_identity", operator_norm(f - ComplexMatrix::identity(f.rows()))}};
}

inline int cmd_gen(const std::string& flavor, std::size_t d, std::size_t n, std::uint64_t seed, double unit_fraction,
                   const Output& output) {
  std::vector<ComplexMatrix> ms;
  json extra = {{"flavor", flavor}, {"seed", seed}};
  if (flavor == "commuting-resolution") {
    ms = commuting_resolution_construction(d, n, seed).effects;
  } else if (flavor == "commuting-subnormalized") {
    ms = commuting_subnormalized_construction(d, n, seed, unit_fraction).effects;
    extra["unit_fraction"] = unit_fraction;
  } else {
    ms = noncommuting_resolution_matrices(d, n, seed);
  }
  output.emit(io::effect_set_text(ms, extra));
  return kOk;
}

inline int cmd_validate(const std::string& path, const Tolerances& tol, const Output& output, std::ostream& err) {
  const auto ms = io::parse_effect_matrices(io::read_file(path));
  json report = {{"d", ms.front().rows()}, {"n", ms.size()}};
  report["effects"] = spectrum_report(ms, tol);
  report["commutators"] = commutator_report(ms);
  try {
    report["square_sum"] = square_sum_report(ms);
  } catch (const Error&) {
    report["square_sum"] = nullptr;
  }
  int code = kOk;
  try {
    const EffectSet set = build_effect_set(ms, tol);
    report["valid"] = true;
    report["commuting"] = set.commuting();
    report["normalization"] = std::string(to_string(set.normalization()));
  } catch (const Error& e) {
    report["valid"] = false;
    report["violation"] = std::string(to_string(e.code()));
    report["message"] = e.what();
    err << e.what() << "\n";
    code = kFailed;
  }
  output.emit(report);
  return code;
}

inline int cmd_analyze(const std::string& path, const Tolerances& tol, const Output& output) {
  const EffectSet set = load_set(path, tol);
  const LuedersOperation op(set);
  json report = {{"d", set.dim()},
                 {"n", set.size()},
                 {"commuting", set.commuting()},
                 {"normalization", std::string(to_string(set.normalization()))},
                 {"max_commutator", set.max_commutator_norm()},
                 {"resolution_defect", set.resolution_defect()},
                 {"channel_norm", operator_norm(set.square_sum())},
                 {"fixed_dim", fixed_point_space(op, tol.nullspace).dimension()},
                 {"commutant_dim", commutant(set, tol.nullspace).dimension()}};
  if (set.commuting()) {
    const auto joint = joint_eigenspaces(set, tol);
    json blocks = json::array();
    for (const auto& b : joint.blocks) blocks.push_back({{"dim", b.dim()}, {"eigenvalues", b.eigenvalues}});
    report["joint_blocks"] = std::move(blocks);
    report["unit_eigenprojector_rank"] = std::lround(unit_eigenprojector(set, tol).trace().real());
  }
  output.emit(report);
  return kOk;
}

inline int cmd_verify(const std::string& path, const Tolerances& tol, const Output& output) {
  const auto report = verify_fixed_point_claim(load_set(path, tol), tol);
  output.emit(io::to_json(report));
  return report.verdict ? kOk : kFailed;
}

inline int cmd_witness(const std::string& path, const std::string& operator_path, std::size_t effect_index,
                       std::optional<std::int64_t> p, bool full, const Tolerances& tol, const Output& output) {
  const EffectSet set = load_set(path, tol);
  const ComplexMatrix b = io::parse_operator(io::read_file(operator_path), set.dim());
  if (p) {
    output.emit(io::to_json(build_contractive_block(set, b, *p, tol), full));
    return kOk;
  }
  if (effect_index >= set.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "effect index " + std::to_string(effect_index) + " of " +
                                                std::to_string(set.size()));
  }
  output.emit(io::to_json(witness_search(set[effect_index], b, tol), full));
  return kOk;
}

inline std::string fixed7(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.7f", x);
  return buf;
}

inline int cmd_bound(std::int64_t n, std::int64_t m, std::optional<std::int64_t> p, const Output& output) {
  std::string text;
  if (p) {
    text += "bound " + fixed7(contraction_bound(n, m, *p)) + "\n";
    text += "bound_without_p_factor " + fixed7(contraction_bound_without_p_factor(n, m, *p)) + "\n";
  }
  text += "p_star " + std::to_string(smallest_positive_bound_p(n, m)) + "\n";
  output.emit(text);
  return kOk;
}

inline int cmd_nagy(const std::string& path, const Tolerances& tol, const Output& output) {
  const auto sol = nagy_solve(LuedersOperation(load_set(path, tol)), tol);
  output.emit(json{{"residual", sol.residual},
                   {"distance_to_half_identity", sol.distance_to_half_identity},
                   {"in_effect_space", sol.in_effect_space},
                   {"solution", io::matrix_to_json(sol.solution)}});
  return kOk;
}

inline int cmd_suite(bool quick, const Output& output, std::ostream& err) {
  const auto scale = quick ? battery::Scale::quick() : battery::Scale::full();
  const auto results = battery::run_all(scale, [&](const battery::CriterionResult& r) {
    err << (r.passed() ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.name << " [" << r.cases - r.failures
        << "/" << r.cases << "] " << r.detail << "\n";
  });
  json criteria = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed();
    criteria.push_back({{"id", r.id},
                        {"name", r.name},
                        {"cases", r.cases},
                        {"failures", r.failures},
                        {"passed", r.passed()},
                        {"detail", r.detail}});
  }
  output.emit(json{{"scale", scale.name}, {"passed", all}, {"criteria", std::move(criteria)}});
  return all ? kOk : kFailed;
}

}  // namespace detail

/// Runs one command line (without the program name) and returns the exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lueders operations: generation, validation, fixed points, witnesses and bounds", "lueders"};
  app.require_subcommand(1);

  Tolerances tol;
  std::string input, operator_path, out_path, flavor = "commuting-resolution";
  std::size_t d = 0, n = 0, effect_index = 0;
  std::uint64_t seed = 0;
  double unit_fraction = 0.0;
  std::int64_t bound_n = 0, bound_m = 0, p = 0;
  bool full = false, quick = false;

  auto add_out = [&](CLI::App* cmd) { cmd->add_option("--out", out_path, "write to this file instead of stdout"); };
  auto add_input = [&](CLI::App* cmd) {
    cmd->add_option("set", input, "effect-set JSON file")->required();
    detail::add_tolerance_options(cmd, tol);
    add_out(cmd);
  };

  auto* gen = app.add_subcommand("gen", "generate a seeded effect set");
  gen->add_option("--flavor", flavor)
      ->check(CLI::IsMember({"commuting-resolution", "commuting-subnormalized", "noncommuting-resolution"}));
  gen->add_option("--d", d, "Hilbert space dimension")->required()->check(CLI::Range(1, 64));
  gen->add_option("--n", n, "number of effects")->required()->check(CLI::Range(1, 64));
  gen->add_option("--seed", seed);
  gen->add_option("--unit-fraction", unit_fraction, "share of joint eigenvectors with unit tuple")
      ->check(CLI::Range(0.0, 1.0));
  add_out(gen);

  auto* validate = app.add_subcommand("validate", "check effect-set invariants");
  add_input(validate);
  auto* analyze = app.add_subcommand("analyze", "fixed space, commutant and joint structure");
  add_input(analyze);
  auto* verify = app.add_subcommand("verify", "compare the fixed space with the (projected) commutant");
  add_input(verify);
  auto* nagy = app.add_subcommand("nagy", "solve Phi(X) = I - X");
  add_input(nagy);

  auto* witness = app.add_subcommand("witness", "dyadic off-diagonal witness for an operator");
  add_input(witness);
  witness->add_option("--operator", operator_path, "operator JSON file")->required();
  witness->add_option("--effect-index", effect_index);
  auto* p_opt = witness->add_option("--p", p, "build the contractive block at refinement p")->check(CLI::PositiveNumber);
  witness->add_flag("--full", full, "include projector matrices");

  auto* bound = app.add_subcommand("bound", "contraction bound and smallest p with a positive bound");
  bound->add_option("--n", bound_n)->required()->check(CLI::PositiveNumber);
  bound->add_option("--m", bound_m)->required()->check(CLI::PositiveNumber);
  auto* bound_p = bound->add_option("--p", p)->check(CLI::PositiveNumber);
  add_out(bound);

  auto* suite = app.add_subcommand("suite", "run the acceptance battery");
  suite->add_flag("--quick", quick, "small scale: d <= 4, 20 seeds per pool");
  add_out(suite);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInternal;
  }

  const detail::Output output{out_path, out};
  try {
    if (*gen) return detail::cmd_gen(flavor, d, n, seed, unit_fraction, output);
    if (*validate) return detail::cmd_validate(input, tol, output, err);
    if (*analyze) return detail::cmd_analyze(input, tol, output);
    if (*verify) return detail::cmd_verify(input, tol, output);
    if (*nagy) return detail::cmd_nagy(input, tol, output);
    if (*witness) {
      return detail::cmd_witness(input, operator_path, effect_index,
                                 *p_opt ? std::optional<std::int64_t>(p) : std::nullopt, full, tol, output);
    }
    if (*bound) return detail::cmd_bound(bound_n, bound_m, *bound_p ? std::optional<std::int64_t>(p) : std::nullopt,
                                         output);
    if (*suite) return detail::cmd_suite(quick, output, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    if (e.code() == ErrorCode::CommutesNoWitness) {
      output.emit(detail::json{{"result", "CommutesNoWitness"}, {"message", e.what()}});
      return kNoWitness;
    }
    return kFailed;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

}  // namespace lueders::cli
