// Builds a commuting resolution, compares its fixed points with the commutant,
// and finds a witness for an operator that fails to commute.

#include <iostream>

#include "lueders.hpp"

int main() {
  using namespace lueders;

  const EffectSet set = generate_commuting_resolution(4, 3, 7);
  const LuedersOperation phi(set);

  const TheoremReport report = verify_commutant_claim(set);
  std::cout << "fixed dim " << report.fixed_space_dim << ", commutant dim " << report.target_space_dim
            << ", distance " << report.projector_distance << ", verdict " << std::boolalpha << report.verdict << "\n";

  const auto joint = joint_eigenspaces(set);
  std::cout << joint.blocks.size() << " joint blocks, sum of squared sizes " << joint.commutant_dimension() << "\n";

  std::cout << "||Phi|| = " << channel_norm(phi).norm << "\n";
  std::cout << "||X - I/2|| for Phi(X) = I - X: " << nagy_solve(phi).distance_to_half_identity << "\n";

  SplitMix64 rng(1);
  const ComplexMatrix b = random_gaussian_matrix(4, 4, rng);
  const WitnessCertificate w = witness_search(set[0], b);
  std::cout << "witness at m=" << w.m << " (k, j) = (" << w.k << ", " << w.j << "), block norm " << w.block_norm
            << "\n";

  const ContractionReport c = build_contractive_block(set, b, smallest_positive_bound_p(3, w.m));
  std::cout << "contraction ratio " << c.achieved_ratio << " >= bound " << c.bound << "\n";
}
