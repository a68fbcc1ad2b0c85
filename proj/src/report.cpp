#include "mzdual/report.hpp"

#include <algorithm>

namespace mzdual {

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* VerificationReport::find(const std::string& name) const {
  for (const Check& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

void VerificationReport::add(std::string name, double value, double tolerance,
                             std::string witness) {
  checks.push_back({std::move(name), value, tolerance, value <= tolerance, std::move(witness)});
}

}  // namespace mzdual
