// Curvature and algebraic operations for invariant su(2)-valued connections
// on the principal orbits.  The orbit coframe is (e_1,e_2,e_3,e_1',e_2',e_3')
// with de_i = -e_j ^ e_k (cyclic) on each factor, and the su(2) basis
// satisfies [E_i,E_j] = E_k, so Lie brackets are plain cross products.

#include "g2inst/su2.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "g2inst/metric.hpp"

namespace g2inst {

namespace {
// Cyclic successor pairs for i = 0,1,2: (j,k) = (1,2),(2,0),(0,1).
constexpr int JO[3] = {1, 2, 0};
constexpr int KO[3] = {2, 0, 1};
}  // namespace

CurvatureComponents curvature(const InvariantConnection& c) {
  CurvatureComponents F;
  for (int i = 0; i < 3; ++i) {
    const int j = JO[i], k = KO[i];
    F.e_iip[i] = bracket(c.alpha[i], c.alphaP[i]);
    F.e_jk[i] = bracket(c.alpha[j], c.alpha[k]) - c.alpha[i];
    F.e_jpkp[i] = bracket(c.alphaP[j], c.alphaP[k]) - c.alphaP[i];
    F.e_jkp[i] = bracket(c.alpha[j], c.alphaP[k]);
    F.e_jpk[i] = bracket(c.alphaP[j], c.alpha[k]);
  }
  return F;
}

InvariantConnection embed_reduced(const ConnectionState& z) {
  // alpha_1 = f E_1, alpha_2 = f E_2, alpha_3 = (g/2 + h) E_3,
  // alpha_1' = f' E_1, alpha_2' = f' E_2, alpha_3' = (h - g/2) E_3.
  const Su2 E1(1, 0, 0), E2(0, 1, 0), E3(0, 0, 1);
  InvariantConnection c;
  c.alpha[0] = z.f * E1;
  c.alpha[1] = z.f * E2;
  c.alpha[2] = (0.5 * z.g + z.h) * E3;
  c.alphaP[0] = z.fp * E1;
  c.alphaP[1] = z.fp * E2;
  c.alphaP[2] = (z.h - 0.5 * z.g) * E3;
  return c;
}

ConnectionState extract_reduced(const InvariantConnection& c) {
  ConnectionState z;
  z.f = c.alpha[0](0);
  z.fp = c.alphaP[0](0);
  z.g = c.alpha[2](2) - c.alphaP[2](2);
  z.h = 0.5 * (c.alpha[2](2) + c.alphaP[2](2));
  return z;
}

double constraint_residual(const InvariantConnection& c, const MetricSample& s) {
  // da*db*([a1,a1'] + [a2,a2']) + da^2*[a3,a3'] must vanish; this is the
  // momentum-map condition that the evolution preserves.
  const Su2 v = s.da * s.db *
                    (bracket(c.alpha[0], c.alphaP[0]) + bracket(c.alpha[1], c.alphaP[1])) +
                s.da * s.da * bracket(c.alpha[2], c.alphaP[2]);
  return v.norm();
}

double curvature_norm(const InvariantConnection& c, const InvariantConnection& c_dot,
                      const MetricSample& s, const MetricParams& p) {
  // Pointwise |F|^2 in the coframe (dt, e_1, e_2, e_3, e_1', e_2', e_3').
  // For each su(2) component l, collect the antisymmetric coefficient matrix
  // W^l and contract with the inverse metric: |F|^2 = -1/2 sum_l tr((W^l G^-1)^2).
  const CurvatureComponents F = curvature(c);

  const Eigen::Matrix<double, 7, 7> G = metric_tensor(s, p);
  Eigen::LLT<Eigen::Matrix<double, 7, 7>> llt(G);
  if (llt.info() != Eigen::Success) throw NonPositiveMetric("metric tensor not positive definite");
  const Eigen::Matrix<double, 7, 7> Ginv =
      llt.solve(Eigen::Matrix<double, 7, 7>::Identity());

  double total = 0.0;
  for (int l = 0; l < 3; ++l) {
    Eigen::Matrix<double, 7, 7> W = Eigen::Matrix<double, 7, 7>::Zero();
    auto put = [&W](int r, int col, double v) {
      W(r, col) += v;
      W(col, r) -= v;
    };
    // dt ^ e_i and dt ^ e_i' carry the time derivatives of the connection.
    for (int i = 0; i < 3; ++i) {
      put(0, 1 + i, c_dot.alpha[i](l));
      put(0, 4 + i, c_dot.alphaP[i](l));
    }
    for (int i = 0; i < 3; ++i) {
      const int j = JO[i], k = KO[i];
      put(1 + i, 4 + i, F.e_iip[i](l));
      put(1 + j, 1 + k, F.e_jk[i](l));
      put(4 + j, 4 + k, F.e_jpkp[i](l));
      put(1 + j, 4 + k, F.e_jkp[i](l));
      put(4 + j, 1 + k, F.e_jpk[i](l));
    }
    total += -0.5 * (W * Ginv * W * Ginv).trace();
  }
  return std::sqrt(total);
}

}  // namespace g2inst
