#include <cstdio>

#include "../tools/acceptance.hpp"

int main() {
  auto results = floq::acceptance::run_all();
  int failures = 0;
  for (const auto& r : results) {
    std::printf("criterion %d (%s): %s  [%.1fs]%s%s\n", r.id, r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.seconds, r.detail.empty() ? "" : " -- ",
                r.detail.c_str());
    if (!r.pass) ++failures;
  }
  std::printf("%zu/%zu criteria passed\n", results.size() - failures, results.size());
  return failures == 0 ? 0 : 1;
}
