#pragma once
// su(2)-valued data of an invariant connection.  We work in a basis
// E1, E2, E3 of su(2) normalized so that [E_i, E_j] = E_k for (i, j, k)
// cyclic; in coordinates the bracket is then the vector cross product.
// A connection is described by six su(2) elements (alpha_i, alpha_i'),
// one per invariant coframe direction e_i, e_i' of the principal orbit.

#include <array>

#include <Eigen/Dense>

#include "g2inst/types.hpp"

namespace g2inst {

using Su2 = Eigen::Vector3d;

inline Su2 bracket(const Su2& x, const Su2& y) { return x.cross(y); }

struct InvariantConnection {
  std::array<Su2, 3> alpha{Su2::Zero(), Su2::Zero(), Su2::Zero()};
  std::array<Su2, 3> alphaP{Su2::Zero(), Su2::Zero(), Su2::Zero()};

  using Packed = Eigen::Matrix<double, 18, 1>;
  Packed pack() const {
    Packed v;
    for (int i = 0; i < 3; ++i) {
      v.segment<3>(3 * i) = alpha[static_cast<size_t>(i)];
      v.segment<3>(9 + 3 * i) = alphaP[static_cast<size_t>(i)];
    }
    return v;
  }
  static InvariantConnection unpack(const Packed& v) {
    InvariantConnection c;
    for (int i = 0; i < 3; ++i) {
      c.alpha[static_cast<size_t>(i)] = v.segment<3>(3 * i);
      c.alphaP[static_cast<size_t>(i)] = v.segment<3>(9 + 3 * i);
    }
    return c;
  }
};

// Orbit components of the curvature 2-form, indexed by the cyclic triple
// (i, j, k): entries on e_i^ e_i'^, e_j^ e_k, e_j'^ e_k', e_j^ e_k' and
// e_j'^ e_k respectively.
struct CurvatureComponents {
  std::array<Su2, 3> e_iip;   // [alpha_i, alpha_i']
  std::array<Su2, 3> e_jk;    // [alpha_j, alpha_k] - alpha_i
  std::array<Su2, 3> e_jpkp;  // [alpha_j', alpha_k'] - alpha_i'
  std::array<Su2, 3> e_jkp;   // [alpha_j, alpha_k']
  std::array<Su2, 3> e_jpk;   // [alpha_j', alpha_k]
};

CurvatureComponents curvature(const InvariantConnection& c);

// Embedding of the reduced state (f, f', g, h):
//   alpha_1 = f E1, alpha_2 = f E2, alpha_3 = (g/2 + h) E3,
//   alpha_1' = f' E1, alpha_2' = f' E2, alpha_3' = (h - g/2) E3.
InvariantConnection embed_reduced(const ConnectionState& z);

// Left inverse of embed_reduced on its image (reads the distinguished
// components; no projection of generic connections is implied).
ConnectionState extract_reduced(const InvariantConnection& c);

// Residual of the algebraic constraint propagated by the flow:
//   da*db*([a1,a1'] + [a2,a2']) + da^2*[a3,a3'] = 0.
double constraint_residual(const InvariantConnection& c, const MetricSample& s);

// Pointwise norm |F_A| of the curvature with respect to the 7x7 metric
// tensor of the sample: F_A = dt^ alpha_dot + F_alpha, the su(2) inner
// product is the Euclidean one of the E-basis, and for each Lie coordinate
// the squared 2-form norm is -1/2 tr((F g^{-1})^2).  Throws NonPositiveMetric
// if the sample's tensor is not positive definite.
double curvature_norm(const InvariantConnection& c, const InvariantConnection& c_dot,
                      const MetricSample& s, const MetricParams& p);

}  // namespace g2inst
