#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mlw {

struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;  // worst case seen, in the units of the bound
  double bound = 0.0;
};

struct VerifyOptions {
  bool fast = false;
  std::uint64_t seed = 1;
  int cases = 100;
};

/// Adjoint identities, the elliptic Taylor test, mirror-map argmin oracles
/// and the conjugate/Bregman identities for every regularizer.
std::vector<CheckResult> run_verification(const VerifyOptions& opts = {});

std::vector<CheckResult> verify_adjoints(const VerifyOptions& opts);
std::vector<CheckResult> verify_taylor(const VerifyOptions& opts);
std::vector<CheckResult> verify_mirror_oracles(const VerifyOptions& opts);
std::vector<CheckResult> verify_convex_identities(const VerifyOptions& opts);

void print_checks(std::ostream& os, const std::vector<CheckResult>& checks);

}  // namespace mlw
