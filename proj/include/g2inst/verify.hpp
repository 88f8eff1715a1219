#pragma once
// End-to-end verification suite.  Each check recomputes one of the
// headline results (fixed-point linearizations, the explicit cone
// heteroclinic, the abelian family, local-solver spectra, metric tuning,
// the shooting family, symmetry reductions, parity exponents, invariant
// lines of the linearized flow, and the stable-manifold iteration) and
// compares against data that is frozen in source.  Tolerances live next to
// the checks; the CLI prints the table, the gate binary asserts it.

#include <string>
#include <vector>

namespace g2inst::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;   // worst error (or signed margin) observed
  double tolerance = 0.0;  // pinned bound the measurement is held to
  double seconds = 0.0;
  std::string detail;      // one-line account of what was measured
};

struct VerifyOptions {
  unsigned seed = 20260815;
  int jobs = 0;        // <=0: hardware count
  bool quick = false;  // drop the two long checks (family sweep, manifold)
  // Self-test knob: adds the given amount to the Phi coefficient inside the
  // abelian residual check only.  A nonzero nudge must flip that check to
  // FAIL, demonstrating the residual actually measures the flow equations.
  double coefficient_nudge = 0.0;
};

// Runs checks in their numbered order; never throws for a numeric failure
// (the failure lands in the table), only for environmental problems.
std::vector<CheckResult> run_verification(const VerifyOptions& opt);

std::string render_table(const std::vector<CheckResult>& rows);

}  // namespace g2inst::verify
