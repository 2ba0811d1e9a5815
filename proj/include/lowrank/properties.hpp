#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lowrank {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Randomized checks of the geometric inequalities, solver certificates and
/// file-format round trips. Deterministic for a fixed seed.
std::vector<PropertyResult> run_property_suite(std::uint64_t seed = 20211017);

} // namespace lowrank
