#pragma once

#include <string>
#include <vector>

namespace floq::acceptance {

struct Result {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

/// Runs the ten acceptance checks; randomized samples derive from `seed`.
std::vector<Result> run_all(unsigned seed = 12345);

}  // namespace floq::acceptance
