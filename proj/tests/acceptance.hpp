#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace netmimo::acceptance {

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<int> all_criteria();

/// Runs one criterion; exceptions count as failures.
Outcome run_criterion(int id, std::uint64_t seed = 1);

/// Runs the given criteria in order and prints one PASS/FAIL line each.
std::vector<Outcome> run_suite(const std::vector<int>& ids, std::uint64_t seed, std::ostream& log);

}  // namespace netmimo::acceptance
