#pragma once
// Shared vocabulary types: parameters of the invariant geometry, samples of
// the metric profile along the transverse geodesic, coefficient triples of
// the connection ODEs, reduced connection states, and the error taxonomy
// used across modules.  Most structs are templated on the scalar so that
// truncated power series can flow through the same formulas as doubles.

#include <numeric>
#include <stdexcept>
#include <string>

namespace g2inst {

// Parameters of the cohomogeneity-one geometry: the pair of integers (m, n)
// labelling the circle quotient, the scale r0 > 0 of the singular orbit,
// and the free metric shooting parameter beta > 0 (beta = a'(0)/r0^2).
struct MetricParams {
  int m = 1;
  int n = 1;
  double r0 = 1.0;
  double beta = 1.0;
};

// Throws std::invalid_argument unless m, n are positive coprime integers and
// r0, beta are positive.
void validate(const MetricParams& p);

// One sample of the metric profile: values and first derivatives of the two
// coefficient functions a(t), b(t) at time t.
template <class S>
struct MetricSampleT {
  S t{};
  S a{};
  S b{};
  S da{};
  S db{};
};
using MetricSample = MetricSampleT<double>;

// Coefficient triple (Phi, Psi, Chi) of the connection ODE system.  Each is
// a polynomial in (a, b) whose shape depends on the channel (the integer m
// or n entering the vertical direction).
template <class S>
struct CoefficientTripleT {
  S Phi{};
  S Psi{};
  S Chi{};
};
using CoefficientTriple = CoefficientTripleT<double>;

// Which of the two homogeneous directions a coefficient triple belongs to.
enum class Channel { m_channel, n_channel };

// Reduced connection state (f, f', g, h); fp stores f', an independent
// variable of the reduced system, not the t-derivative of f.
template <class S>
struct ConnectionStateT {
  S f{};
  S fp{};
  S g{};
  S h{};
};
using ConnectionState = ConnectionStateT<double>;

// ---------------------------------------------------------------------------
// Error taxonomy.  All numerical failure modes derive from NumericError so
// that the CLI can map them to a single exit code; configuration problems
// are a separate branch.

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Frame degenerates: a first derivative of the profile vanishes where the
// formulas divide by it.
struct DegenerateFrame : NumericError {
  using NumericError::NumericError;
};

// A right-hand side was evaluated at t = 0 where it has a pole.
struct SingularTime : NumericError {
  using NumericError::NumericError;
};

// The 7x7 metric tensor failed to be positive definite at a sample.
struct NonPositiveMetric : NumericError {
  using NumericError::NumericError;
};

// Trajectory left the admissible region; t_star is the detected time.
struct BlowUp : NumericError {
  double t_star;
  BlowUp(const std::string& msg, double ts) : NumericError(msg), t_star(ts) {}
};

// Adaptive stepper could not make progress.
struct StepFailure : NumericError {
  double t_star;
  StepFailure(const std::string& msg, double ts) : NumericError(msg), t_star(ts) {}
};

// A scan failed to produce a sign change to bisect.
struct NoBracket : NumericError {
  using NumericError::NumericError;
};

// Bisection or fixed-point iteration stalled without meeting its target.
struct NoConvergence : NumericError {
  using NumericError::NumericError;
};

// Solvability conditions of a singular initial value problem fail.
struct ConditionViolated : NumericError {
  using NumericError::NumericError;
};

// The recursion matrix h*Id - dM at some order h is singular.
struct SingularRecursion : NumericError {
  int order;
  SingularRecursion(const std::string& msg, int h) : NumericError(msg), order(h) {}
};

// A series was requested beyond the order the chosen source provides.
struct SeriesOrderUnavailable : NumericError {
  using NumericError::NumericError;
};

// Series evaluation requested outside its estimated radius of trust, or the
// truncation error estimate at the handoff time exceeds the tolerance.
struct OutOfTrust : NumericError {
  using NumericError::NumericError;
};

// A closed-form denominator vanished along the profile.
struct DenominatorVanishes : NumericError {
  double t_star;
  DenominatorVanishes(const std::string& msg, double ts) : NumericError(msg), t_star(ts) {}
};

// Bundle indices fail the congruence required for the invariant setup.
struct WrongBundle : NumericError {
  using NumericError::NumericError;
};

// The integral-equation iteration failed to contract.
struct NoContraction : NumericError {
  using NumericError::NumericError;
};

// An eigendecomposition did not converge or produced unusable output.
struct EigenSolveFailure : NumericError {
  using NumericError::NumericError;
};

// Configuration file / CLI flag problems (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void validate(const MetricParams& p) {
  if (p.m <= 0 || p.n <= 0)
    throw std::invalid_argument("metric parameters: m, n must be positive integers");
  if (std::gcd(p.m, p.n) != 1)
    throw std::invalid_argument("metric parameters: m, n must be coprime");
  if (!(p.r0 > 0.0))
    throw std::invalid_argument("metric parameters: r0 must be positive");
  if (!(p.beta > 0.0))
    throw std::invalid_argument("metric parameters: beta must be positive");
}

}  // namespace g2inst
