#pragma once

// Randomized checks of the pointwise identities of the field algebra.

#include <cstdint>
#include <string>
#include <vector>

namespace bifl::cli {

struct IdentityCheck {
  std::string name;
  double max_deviation = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Draws `samples` field points per check from a seeded generator, with b in
/// {0.5, 1, 2}. Pointwise checks use components uniform in [-3b, 3b]; the MB
/// line checks use B and D uniform in the ball of radius b.
std::vector<IdentityCheck> run_identity_suite(int samples, std::uint64_t seed);

}  // namespace bifl::cli
