#include "ym/group.hpp"

#include <cmath>

namespace ym {

std::string group_name(GroupTag t) { return t == GroupTag::U1 ? "u1" : "su2"; }

GroupTag parse_group(const std::string& name) {
  if (name == "u1" || name == "U1") return GroupTag::U1;
  if (name == "su2" || name == "SU2") return GroupTag::SU2;
  throw std::invalid_argument("unknown group '" + name + "' (expected u1 or su2)");
}

AlgebraElement zero_algebra(GroupTag tag) { return AlgebraElement{tag, Eigen::Vector3d::Zero()}; }

GroupElement identity(GroupTag tag) { return GroupElement{tag, Eigen::Vector4d(1, 0, 0, 0)}; }

static void check_tags(GroupTag a, GroupTag b) {
  if (a != b) throw std::invalid_argument("group tag mismatch");
}

GroupElement renormalized(const GroupElement& g) {
  // rescale only once the deviation is measurable, so identity factors and
  // already-unit elements pass through bit-exactly
  GroupElement r = g;
  if (g.tag == GroupTag::U1) {
    const double n2 = g.q[0] * g.q[0] + g.q[1] * g.q[1];
    if (std::abs(n2 - 1.0) <= 1e-12) return r;
    const double n = std::sqrt(n2);
    r.q[0] = g.q[0] / n;
    r.q[1] = g.q[1] / n;
  } else {
    const double n2 = g.q.squaredNorm();
    if (std::abs(n2 - 1.0) <= 1e-12) return r;
    r.q = g.q / std::sqrt(n2);
  }
  return r;
}

double unit_norm_deviation(const GroupElement& g) {
  if (g.tag == GroupTag::U1) return std::abs(std::hypot(g.q[0], g.q[1]) - 1.0);
  return std::abs(g.q.norm() - 1.0);
}

GroupElement mul(const GroupElement& a, const GroupElement& b) {
  check_tags(a.tag, b.tag);
  GroupElement r;
  r.tag = a.tag;
  if (a.tag == GroupTag::U1) {
    r.q[0] = a.q[0] * b.q[0] - a.q[1] * b.q[1];
    r.q[1] = a.q[0] * b.q[1] + a.q[1] * b.q[0];
    r.q[2] = r.q[3] = 0;
  } else {
    // (a0 + i a.s)(b0 + i b.s) = (a0 b0 - a.b) + i (a0 b + b0 a - a x b).s
    const Eigen::Vector3d av = a.q.tail<3>(), bv = b.q.tail<3>();
    r.q[0] = a.q[0] * b.q[0] - av.dot(bv);
    r.q.tail<3>() = a.q[0] * bv + b.q[0] * av - av.cross(bv);
  }
  return renormalized(r);
}

GroupElement inverse(const GroupElement& g) {
  GroupElement r = g;
  if (g.tag == GroupTag::U1) {
    r.q[1] = -g.q[1];
  } else {
    r.q.tail<3>() = -g.q.tail<3>();
  }
  return r;
}

double re_trace(const GroupElement& g) {
  return g.tag == GroupTag::U1 ? g.q[0] : 2.0 * g.q[0];
}

GroupElement exp(const AlgebraElement& x) {
  if (!x.v.allFinite()) throw std::invalid_argument("exp: non-finite algebra element");
  GroupElement r;
  r.tag = x.tag;
  if (x.tag == GroupTag::U1) {
    r.q = Eigen::Vector4d(std::cos(x.v[0]), std::sin(x.v[0]), 0, 0);
    return r;
  }
  const double theta = x.v.norm();
  // exp((i/2) v.s) = cos(|v|/2) + i sin(|v|/2) (v/|v|).s
  double s;  // sin(theta/2)/theta
  if (theta < 1e-6) {
    s = 0.5 - theta * theta / 48.0;
  } else {
    s = std::sin(0.5 * theta) / theta;
  }
  r.q[0] = std::cos(0.5 * theta);
  r.q.tail<3>() = s * x.v;
  return r;
}

bool near_branch_cut(const GroupElement& g) {
  if (g.tag == GroupTag::U1) return std::hypot(g.q[0] + 1.0, g.q[1]) <= branch_cut_tol;
  return std::abs(2.0 * g.q[0] + 2.0) <= branch_cut_tol;
}

AlgebraElement log(const GroupElement& g) {
  if (near_branch_cut(g)) throw BranchCutError("log: element at the branch cut (trace near cut value)");
  AlgebraElement x;
  x.tag = g.tag;
  if (g.tag == GroupTag::U1) {
    x.v[0] = std::atan2(g.q[1], g.q[0]);
    return x;
  }
  const Eigen::Vector3d a = g.q.tail<3>();
  const double r = a.norm();
  const double theta = 2.0 * std::atan2(r, g.q[0]);
  if (r < 1e-9) {
    x.v = (2.0 / g.q[0]) * a;  // q0 near 1 here; q0 near -1 was rejected above
  } else {
    x.v = (theta / r) * a;
  }
  return x;
}

AlgebraElement conjugate(const GroupElement& g, const AlgebraElement& x) {
  check_tags(g.tag, x.tag);
  if (g.tag == GroupTag::U1) return x;  // abelian Ad is trivial
  const Eigen::Vector3d a = g.q.tail<3>();
  const double q0 = g.q[0];
  AlgebraElement r;
  r.tag = x.tag;
  r.v = (q0 * q0 - a.squaredNorm()) * x.v + 2.0 * a.dot(x.v) * a - 2.0 * q0 * a.cross(x.v);
  return r;
}

AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
  check_tags(x.tag, y.tag);
  AlgebraElement r;
  r.tag = x.tag;
  if (x.tag == GroupTag::U1) return r;
  // [(i/2) x.s, (i/2) y.s] = -(i/2) (x cross y).s
  r.v = -x.v.cross(y.v);
  return r;
}

double inner(const AlgebraElement& x, const AlgebraElement& y) {
  check_tags(x.tag, y.tag);
  return x.v.dot(y.v);
}

double norm(const AlgebraElement& x) { return x.v.norm(); }

AlgebraElement operator+(const AlgebraElement& x, const AlgebraElement& y) {
  check_tags(x.tag, y.tag);
  return AlgebraElement{x.tag, x.v + y.v};
}

AlgebraElement operator-(const AlgebraElement& x, const AlgebraElement& y) {
  check_tags(x.tag, y.tag);
  return AlgebraElement{x.tag, x.v - y.v};
}

AlgebraElement operator*(double s, const AlgebraElement& x) { return AlgebraElement{x.tag, s * x.v}; }

double max_abs_diff(const GroupElement& a, const GroupElement& b) {
  check_tags(a.tag, b.tag);
  return (a.q - b.q).cwiseAbs().maxCoeff();
}

double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;  // [0, 1)
  return lo + u * (hi - lo);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

AlgebraElement random_algebra(Rng& rng, GroupTag tag, double scale) {
  if (scale < 0) throw std::invalid_argument("random_algebra: scale must be >= 0");
  AlgebraElement x = zero_algebra(tag);
  for (int i = 0; i < algebra_dim(tag); ++i) x.v[i] = rng.uniform(-scale, scale);
  return x;
}

GroupElement random_group(Rng& rng, GroupTag tag, double scale) {
  return exp(random_algebra(rng, tag, scale));
}

}  // namespace ym
