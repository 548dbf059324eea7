#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "effects.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "operation.hpp"
#include "random.hpp"
#include "witness.hpp"

// The acceptance battery: every criterion runs over a seeded pool and counts
// failures. Tolerances here are the acceptance thresholds, fixed in code.

namespace lueders::battery {

struct Scale {
  std::string name = "default";
  std::size_t max_d = 8;
  std::size_t commuting_sets = 210;
  std::size_t subnormalized_sets = 105;
  std::size_t noncommuting_sets = 105;
  std::size_t witness_pairs = 100;
  std::size_t commuting_pairs = 50;
  std::size_t contraction_instances = 50;
  std::size_t density_trials = 500;
  std::size_t hermitian_trials = 1000;
  std::size_t partition_effects = 100;
  std::size_t norm_samples = 200;

  static Scale full() { return {}; }

  static Scale quick() {
    Scale s;
    s.name = "quick";
    s.max_d = 4;
    s.commuting_sets = 20;
    s.subnormalized_sets = 20;
    s.noncommuting_sets = 20;
    s.witness_pairs = 20;
    s.commuting_pairs = 20;
    s.contraction_instances = 20;
    s.density_trials = 20;
    s.hermitian_trials = 20;
    s.partition_effects = 20;
    return s;
  }
};

struct CriterionResult {
  int id = 0;
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string detail;

  bool passed() const noexcept { return cases > 0 && failures == 0; }
};

inline constexpr double kSubspaceDistance = 1e-8;
inline constexpr double kNagyDistance = 1e-9;
inline constexpr double kNagyResidual = 1e-10;
inline constexpr double kNormSlack = 1e-10;
inline constexpr double kWitnessAgreement = 1e-10;
inline constexpr double kRatioSlack = 1e-12;
inline constexpr double kCommutantMembership = 1e-9;
inline constexpr double kOrthogonalProjectors = 1e-10;
inline constexpr double kDisturbanceTol = 1e-9;
inline constexpr double kReconstruction = 1e-9;
inline constexpr double kPartition = 1e-10;

namespace detail {

struct Config {
  std::size_t d;
  std::size_t n;
  std::uint64_t seed;
};

// Cycles through d in [2, max_d] and n in [n_lo, n_hi]; seed = case number.
inline std::vector<Config> grid(std::size_t count, std::size_t max_d, std::size_t n_lo, std::size_t n_hi,
                                std::uint64_t seed_offset) {
  std::vector<Config> out;
  const std::size_t d_span = max_d - 1;
  const std::size_t n_span = n_hi - n_lo + 1;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t d = 2 + c % d_span;
    const std::size_t n = n_lo + (c / d_span) % n_span;
    out.push_back({d, n, seed_offset + c});
  }
  return out;
}

inline std::vector<Config> commuting_pool(const Scale& s) { return grid(s.commuting_sets, s.max_d, 1, 5, 1000); }

inline std::vector<Config> subnormalized_pool(const Scale& s) {
  return grid(s.subnormalized_sets, s.max_d, 1, 5, 2000);
}

inline std::vector<Config> noncommuting_pool(const Scale& s) {
  return grid(s.noncommuting_sets, s.max_d, 3, 5, 3000);
}

inline constexpr double kUnitFractions[] = {0.0, 0.25, 0.5};

inline double unit_fraction_for(std::size_t c) { return kUnitFractions[c % 3]; }

class Tally {
 public:
  Tally(int id, std::string name) { r_.id = id; r_.name = std::move(name); }

  void check(bool ok, const std::string& what) {
    ++r_.cases;
    if (!ok) {
      ++r_.failures;
      if (first_failure_.empty()) first_failure_ = what;
    }
  }

  void note_worst(double value) { worst_ = std::max(worst_, value); }

  CriterionResult finish(const std::string& metric) {
    std::ostringstream os;
    os << metric;
    if (worst_ > -std::numeric_limits<double>::infinity()) os << " " << worst_;
    if (!first_failure_.empty()) os << "; first failure: " << first_failure_;
    r_.detail = os.str();
    return r_;
  }

 private:
  CriterionResult r_;
  double worst_ = -std::numeric_limits<double>::infinity();
  std::string first_failure_;
};

inline std::string label(const Config& c) {
  return "d=" + std::to_string(c.d) + " n=" + std::to_string(c.n) + " seed=" + std::to_string(c.seed);
}

}  // namespace detail

inline CriterionResult commutant_equality(const Scale& s) {
  detail::Tally t(1, "fixed points equal commutant (commuting resolutions)");
  for (const auto& c : detail::commuting_pool(s)) {
    const auto set = generate_commuting_resolution(c.d, c.n, c.seed);
    const auto r = verify_commutant_claim(set);
    t.note_worst(r.projector_distance);
    t.check(r.projector_distance <= kSubspaceDistance && r.fixed_space_dim == r.target_space_dim, detail::label(c));
  }
  return t.finish("max projector distance");
}

inline CriterionResult projected_commutant_equality(const Scale& s) {
  detail::Tally t(2, "fixed points equal P . commutant (commuting subnormalized)");
  const auto pool = detail::subnormalized_pool(s);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& c = pool[i];
    const double fraction = detail::unit_fraction_for(i);
    const auto set = generate_commuting_subnormalized(c.d, c.n, c.seed, fraction);
    const auto r = verify_projected_commutant_claim(set);
    t.note_worst(r.projector_distance);
    bool ok = r.projector_distance <= kSubspaceDistance && r.fixed_space_dim == r.target_space_dim;
    if (fraction == 0.0) ok = ok && r.fixed_space_dim == 0;
    t.check(ok, detail::label(c) + " unit_fraction=" + std::to_string(fraction));
  }
  return t.finish("max projector distance");
}

inline CriterionResult noncommuting_equality(const Scale& s) {
  detail::Tally t(3, "fixed points equal commutant (non-commuting resolutions)");
  for (const auto& c : detail::noncommuting_pool(s)) {
    const auto set = generate_noncommuting_resolution(c.d, c.n, c.seed);
    const auto r = verify_commutant_claim(set);
    t.note_worst(r.projector_distance);
    t.check(!set.commuting() && r.projector_distance <= kSubspaceDistance &&
                r.fixed_space_dim == r.target_space_dim,
            detail::label(c));
  }
  return t.finish("max projector distance");
}

inline CriterionResult nagy_uniqueness(const Scale& s) {
  detail::Tally t(4, "Phi(X) = I - X solved by I/2");
  for (const auto& c : detail::commuting_pool(s)) {
    const LuedersOperation op(generate_commuting_resolution(c.d, c.n, c.seed));
    const auto sol = nagy_solve(op);
    t.note_worst(sol.distance_to_half_identity);
    t.check(sol.distance_to_half_identity <= kNagyDistance && sol.residual <= kNagyResidual, detail::label(c));
  }
  return t.finish("max ||X - I/2||_F");
}

inline CriterionResult norm_identity(const Scale& s) {
  detail::Tally t(5, "||Phi|| = ||sum E_i^2||");
  auto run = [&](const EffectSet& set, const std::string& what, std::uint64_t seed) {
    const auto cert = channel_norm(LuedersOperation(set), s.norm_samples, seed, kNormSlack);
    t.note_worst(cert.max_sampled_norm - cert.norm);
    t.check(cert.holds(), what);
  };
  for (const auto& c : detail::commuting_pool(s))
    run(generate_commuting_resolution(c.d, c.n, c.seed), "resolution " + detail::label(c), c.seed);
  const auto sub = detail::subnormalized_pool(s);
  for (std::size_t i = 0; i < sub.size(); ++i)
    run(generate_commuting_subnormalized(sub[i].d, sub[i].n, sub[i].seed, detail::unit_fraction_for(i)),
        "subnormalized " + detail::label(sub[i]), sub[i].seed);
  for (const auto& c : detail::noncommuting_pool(s))
    run(generate_noncommuting_resolution(c.d, c.n, c.seed), "non-commuting " + detail::label(c), c.seed);
  return t.finish("max (sampled norm - ||F||)");
}

/// Effect with a prescribed spectrum in a random basis; the eigenprojectors
/// are read straight off the construction.
struct KnownSpectrumEffect {
  ComplexMatrix basis;
  std::vector<double> spectrum;  // per column of basis
  ComplexMatrix matrix;

  /// Sum of u_v u_v* over columns whose eigenvalue lies in (lo, hi].
  ComplexMatrix window_oracle(double lo, double hi) const {
    const std::size_t d = basis.rows();
    ComplexMatrix p(d, d);
    for (std::size_t v = 0; v < spectrum.size(); ++v) {
      if (!(spectrum[v] > lo && spectrum[v] <= hi)) continue;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) p(i, j) += basis(i, v) * std::conj(basis(j, v));
    }
    return p;
  }
};

inline KnownSpectrumEffect known_spectrum_effect(std::size_t d, std::size_t distinct, SplitMix64& rng) {
  std::vector<double> values(distinct);
  for (auto& v : values) v = rng.uniform();
  std::vector<double> spectrum(d);
  for (std::size_t v = 0; v < d; ++v) spectrum[v] = values[v < distinct ? v : rng() % distinct];
  ComplexMatrix u = random_unitary(d, rng);
  ComplexMatrix m = hermitian_part(reconstruct(u, spectrum));
  return {std::move(u), std::move(spectrum), std::move(m)};
}

inline CriterionResult witness_soundness(const Scale& s) {
  detail::Tally t(6, "dyadic witness soundness");
  for (std::size_t c = 0; c < s.witness_pairs; ++c) {
    SplitMix64 rng(4000 + c);
    const std::size_t d = 2 + c % 5;
    const auto known = known_spectrum_effect(d, std::min<std::size_t>(d, 2 + c % 3), rng);
    const Effect e = validate_effect(known.matrix);
    const ComplexMatrix b = random_gaussian_matrix(d, d, rng);
    const std::string what = "pair " + std::to_string(c);
    try {
      const auto cert = witness_search(e, b);
      const ComplexMatrix oracle = known.window_oracle(bin_edge(cert.k, cert.m), bin_edge(cert.k + 1, cert.m)) * b *
                                   known.window_oracle(bin_edge(cert.j, cert.m), bin_edge(cert.j + 1, cert.m));
      const double gap = std::abs(operator_norm(oracle) - cert.block_norm);
      const double recomputed = operator_norm(cert.left_projector * b * cert.right_projector);
      t.note_worst(gap);
      t.check(std::abs(cert.k - cert.j) >= 2 && gap <= kWitnessAgreement &&
                  recomputed > Tolerances{}.witness * operator_norm(b),
              what);
    } catch (const Error& err) {
      t.check(false, what + ": " + err.what());
    }
  }
  for (std::size_t c = 0; c < s.commuting_pairs; ++c) {
    SplitMix64 rng(5000 + c);
    const std::size_t d = 2 + c % 5;
    const auto known = known_spectrum_effect(d, std::min<std::size_t>(d, 2 + c % 3), rng);
    const Effect e = validate_effect(known.matrix);
    // B = c0 I + c1 E + c2 E^2 commutes with E
    const cplx c0(rng.gaussian(), rng.gaussian()), c1(rng.gaussian(), rng.gaussian()), c2(rng.gaussian(), rng.gaussian());
    const ComplexMatrix b =
        c0 * ComplexMatrix::identity(d) + c1 * known.matrix + c2 * (known.matrix * known.matrix);
    bool typed = false;
    try {
      (void)witness_search(e, b);
    } catch (const Error& err) {
      typed = err.code() == ErrorCode::CommutesNoWitness;
    }
    t.check(typed, "commuting pair " + std::to_string(c));
  }
  return t.finish("max |block norm - oracle|");
}

inline CriterionResult contraction_bound_check(const Scale& s) {
  detail::Tally t(7, "contraction bound on constructed blocks");
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.7f", contraction_bound(1, 2, 100));
    t.check(std::string(buf) == "0.1149750", std::string("bound(1,2,100) printed ") + buf);
    t.check(std::abs(contraction_bound(1, 2, 1000000) - 0.125) <= 1e-4, "bound(1,2,1e6) limit");
  }
  for (std::size_t c = 0; c < s.contraction_instances; ++c) {
    const std::size_t d = 3 + c % std::min<std::size_t>(4, s.max_d - 2);
    const std::size_t n = 2 + c % 2;
    const std::uint64_t seed = 6000 + c;
    const std::string what = "d=" + std::to_string(d) + " n=" + std::to_string(n) + " seed=" + std::to_string(seed);
    try {
      const auto set = generate_commuting_resolution(d, n, seed);
      SplitMix64 rng(derive_seed(seed, 1));
      const ComplexMatrix x = random_gaussian_matrix(d, d, rng);
      const auto m = witness_search(set[0], x).m;
      const auto p_star = smallest_positive_bound_p(static_cast<std::int64_t>(n), m);
      for (const std::int64_t p : {p_star, 4 * p_star}) {
        const auto r = build_contractive_block(set, x, p);
        double comm = 0.0;
        for (const auto& e : set.effects()) {
          comm = std::max({comm, operator_norm(commutator(r.p_projector, e.matrix())),
                           operator_norm(commutator(r.q_projector, e.matrix()))});
        }
        const double pq = operator_norm(r.p_projector * r.q_projector);
        const auto separation = std::abs(r.refined_left.ks.front() - r.refined_right.ks.front());
        t.note_worst(r.bound - r.achieved_ratio);
        t.check(r.bound > 0.0 && r.achieved_ratio >= r.bound - kRatioSlack && comm <= kCommutantMembership &&
                    pq <= kOrthogonalProjectors && separation >= p && r.y_norm > 0.0,
                what + " p=" + std::to_string(p));
      }
    } catch (const Error& err) {
      t.check(false, what + ": " + err.what());
    }
  }
  return t.finish("max (bound - achieved ratio)");
}

inline CriterionResult commutant_structure(const Scale& s) {
  detail::Tally t(8, "dim commutant = sum of squared joint-block sizes");
  auto run = [&](const EffectSet& set, const std::string& what) {
    const auto blocks = joint_eigenspaces(set);
    const auto dim = commutant(set).dimension();
    t.note_worst(std::abs(static_cast<double>(dim) - static_cast<double>(blocks.commutant_dimension())));
    t.check(dim == blocks.commutant_dimension(), what + " commutant " + std::to_string(dim) + " vs blocks " +
                                                     std::to_string(blocks.commutant_dimension()));
  };
  for (const auto& c : detail::commuting_pool(s))
    run(generate_commuting_resolution(c.d, c.n, c.seed), "resolution " + detail::label(c));
  const auto sub = detail::subnormalized_pool(s);
  for (std::size_t i = 0; i < sub.size(); ++i)
    run(generate_commuting_subnormalized(sub[i].d, sub[i].n, sub[i].seed, detail::unit_fraction_for(i)),
        "subnormalized " + detail::label(sub[i]));
  return t.finish("max dimension gap");
}

inline CriterionResult undisturbed_equivalence(const Scale& s) {
  detail::Tally t(9, "undisturbed <=> commutes with every effect");
  std::size_t both_true = 0;
  for (std::size_t c = 0; c < s.density_trials; ++c) {
    const std::size_t d = 2 + c % std::min<std::size_t>(5, s.max_d - 1);
    const std::size_t n = 1 + c % 4;
    const std::uint64_t seed = 7000 + c;
    const auto construction = commuting_resolution_construction(d, n, seed);
    const LuedersOperation op(build_effect_set(construction.effects));
    SplitMix64 rng(derive_seed(seed, 2));
    std::vector<double> weights(d);
    double total = 0.0;
    for (auto& w : weights) total += (w = rng.uniform(0.05, 1.0));
    for (auto& w : weights) w /= total;
    ComplexMatrix diagonal_state = hermitian_part(reconstruct(construction.basis, weights));
    ComplexMatrix rho;
    switch (c % 3) {
      case 0: rho = diagonal_state; break;
      case 1: rho = random_density(d, rng); break;
      default: rho = (1.0 - 1e-3) * diagonal_state + 1e-3 * random_density(d, rng); break;
    }
    rho *= 1.0 / rho.trace().real();
    const auto check = is_undisturbed_state(op, rho, kDisturbanceTol);
    if (check.is_fixed && check.commutes_with_all) ++both_true;
    t.check(check.is_fixed == check.commutes_with_all,
            "trial " + std::to_string(c) + " residual=" + std::to_string(check.fixed_residual) +
                " commutator=" + std::to_string(check.max_commutator));
  }
  return t.finish("states undisturbed " + std::to_string(both_true) + " of " + std::to_string(s.density_trials));
}

inline CriterionResult kernel_health(const Scale& s) {
  detail::Tally t(10, "eigensolver reconstruction and bin partition of unity");
  for (std::size_t c = 0; c < s.hermitian_trials; ++c) {
    SplitMix64 rng(8000 + c);
    const std::size_t d = 1 + c % 12;
    const ComplexMatrix m = random_hermitian(d, rng);
    const auto es = hermitian_eigendecompose(m);
    const double rel = (reconstruct(es.eigenvectors, es.eigenvalues) - m).frobenius_norm() / m.frobenius_norm();
    t.note_worst(rel);
    t.check(rel <= kReconstruction, "hermitian trial " + std::to_string(c));
  }
  for (std::size_t c = 0; c < s.partition_effects; ++c) {
    const std::size_t d = 2 + c % (s.max_d - 1);
    const auto set = generate_commuting_subnormalized(d, 1 + c % 3, 9000 + c, 0.25);
    for (const std::int64_t m : {2, 3, 5, 8}) {
      for (const auto& e : set.effects()) {
        ComplexMatrix sum(d, d);
        for (std::int64_t k = -1; k < m; ++k) sum += spectral_window(e, bin_edge(k, m), bin_edge(k + 1, m)).projector;
        const double err = (sum - ComplexMatrix::identity(d)).frobenius_norm();
        t.check(err <= kPartition, "partition effect set " + std::to_string(c) + " m=" + std::to_string(m));
      }
    }
  }
  return t.finish("max relative reconstruction error");
}

/// Runs criteria 1-10 in order, reporting each as it completes.
inline std::vector<CriterionResult> run_all(const Scale& s,
                                            const std::function<void(const CriterionResult&)>& on_result = {}) {
  using Criterion = CriterionResult (*)(const Scale&);
  const Criterion criteria[] = {commutant_equality,      projected_commutant_equality, noncommuting_equality,
                                nagy_uniqueness,         norm_identity,                witness_soundness,
                                contraction_bound_check, commutant_structure,          undisturbed_equivalence,
                                kernel_health};
  std::vector<CriterionResult> results;
  for (const auto criterion : criteria) {
    CriterionResult r;
    try {
      r = criterion(s);
    } catch (const std::exception& e) {
      r.failures = 1;
      r.cases = 1;
      r.detail = std::string("aborted: ") + e.what();
    }
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace lueders::battery
