#pragma once

#include <string>
#include <vector>

namespace mzdual {

// One pass/fail line of a verification run: a measured quantity against a
// tolerance, plus a human-readable location of the worst point.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::string witness;
};

struct VerificationReport {
  std::vector<Check> checks;

  bool passed() const;
  // nullptr when absent.
  const Check* find(const std::string& name) const;
  void add(std::string name, double value, double tolerance, std::string witness = {});
};

}  // namespace mzdual
