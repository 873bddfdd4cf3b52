#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>

#include "ym/errors.hpp"

namespace ym {

enum class GroupTag { U1, SU2 };

constexpr int algebra_dim(GroupTag t) { return t == GroupTag::U1 ? 1 : 3; }
constexpr int group_dim(GroupTag t) { return t == GroupTag::U1 ? 2 : 4; }

std::string group_name(GroupTag t);
GroupTag parse_group(const std::string& name);

/// Lie-algebra element in the orthonormal basis fixed once per group:
/// U1: X = i v[0]; SU2: X = (i/2)(v[0] s1 + v[1] s2 + v[2] s3) with Pauli
/// matrices s_k. Unused coordinates stay zero.
struct AlgebraElement {
  GroupTag tag = GroupTag::SU2;
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

/// U1: unit complex (q[0], q[1]) = (Re, Im).
/// SU2: unit quaternion g = q[0] + i (q[1] s1 + q[2] s2 + q[3] s3).
struct GroupElement {
  GroupTag tag = GroupTag::SU2;
  Eigen::Vector4d q = Eigen::Vector4d(1, 0, 0, 0);
};

AlgebraElement zero_algebra(GroupTag tag);
GroupElement identity(GroupTag tag);

/// Group product; renormalizes the result so unit-norm drift stays at the
/// roundoff floor over arbitrarily long multiplication chains.
GroupElement mul(const GroupElement& a, const GroupElement& b);
GroupElement inverse(const GroupElement& g);

/// Re tr of the element in the defining representation (1x1 resp. 2x2).
double re_trace(const GroupElement& g);
double unit_norm_deviation(const GroupElement& g);
GroupElement renormalized(const GroupElement& g);

GroupElement exp(const AlgebraElement& x);

/// Principal logarithm. Throws BranchCutError when the trace is within
/// `branch_cut_tol` of the cut value (-1 for U1, -2 for SU2).
AlgebraElement log(const GroupElement& g);
bool near_branch_cut(const GroupElement& g);
inline constexpr double branch_cut_tol = 1e-9;

/// Ad_g x = g x g^-1 (norm-preserving for compact groups).
AlgebraElement conjugate(const GroupElement& g, const AlgebraElement& x);
AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y);

/// Trace form scaled so the chosen basis is orthonormal: coordinate dot product.
double inner(const AlgebraElement& x, const AlgebraElement& y);
double norm(const AlgebraElement& x);

AlgebraElement operator+(const AlgebraElement& x, const AlgebraElement& y);
AlgebraElement operator-(const AlgebraElement& x, const AlgebraElement& y);
AlgebraElement operator*(double s, const AlgebraElement& x);

/// Largest coordinate difference; used for bit-level and tolerance comparisons.
double max_abs_diff(const GroupElement& a, const GroupElement& b);

/// Deterministic stream. Raw 64-bit draws are mapped to doubles in-house so
/// the stream does not depend on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 eng_;
};

/// Per-task seed derivation: seed_i = hash(seed, i) (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Coordinates i.i.d. uniform in [-scale, scale].
AlgebraElement random_algebra(Rng& rng, GroupTag tag, double scale);
GroupElement random_group(Rng& rng, GroupTag tag, double scale);

}  // namespace ym
