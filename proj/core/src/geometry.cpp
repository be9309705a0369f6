#include "hsgns/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hsgns/errors.hpp"

namespace hsgns::geometry {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double tangent_tolerance(std::span<const double> dir) {
  return kTangentTolerance * std::max(1.0, max_abs(dir));
}

// <q-p, q-p>, the squared Minkowski length of the chord between two points.
// For points on H^n this equals 4 sinh^2(d/2).
double chord_squared(std::span<const double> p, std::span<const double> q) noexcept {
  const std::size_t n = p.size() - 1;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = q[i] - p[i];
    s += d * d;
  }
  const double t = q[n] - p[n];
  return s - t * t;
}

double distance_raw(std::span<const double> p, std::span<const double> q) noexcept {
  const double c = -inplace::dot(p, q);
  if (c >= 2.0) return std::acosh(c);
  const double chord = std::sqrt(std::max(0.0, chord_squared(p, q)));
  return 2.0 * std::asinh(0.5 * chord);
}

}  // namespace

// ---------------------------------------------------------------------------

MinkowskiVector::MinkowskiVector(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw std::invalid_argument("MinkowskiVector needs at least 2 coordinates, got " +
                                std::to_string(coords_.size()));
  }
  for (double x : coords_) {
    if (!std::isfinite(x)) throw std::invalid_argument("MinkowskiVector has a non-finite entry");
  }
}

MinkowskiVector MinkowskiVector::zeros(std::size_t ambient_size) {
  return MinkowskiVector(std::vector<double>(ambient_size, 0.0));
}

HyperboloidPoint HyperboloidPoint::from_coords(MinkowskiVector coords, double tolerance) {
  const double q = minkowski_dot(coords, coords);
  if (std::abs(q + 1.0) > tolerance) {
    throw std::invalid_argument("point is off the hyperboloid: <x,x> = " + std::to_string(q));
  }
  if (coords[coords.dim()] < 1.0 - tolerance) {
    throw std::invalid_argument("point is not on the upper sheet: x_n = " +
                                std::to_string(coords[coords.dim()]));
  }
  return HyperboloidPoint(std::move(coords), detail::unchecked);
}

HyperboloidPoint HyperboloidPoint::origin(std::size_t n) {
  if (n < 1) throw std::invalid_argument("hyperboloid dimension must be at least 1");
  std::vector<double> x(n + 1, 0.0);
  x[n] = 1.0;
  return HyperboloidPoint(MinkowskiVector(std::move(x), detail::unchecked), detail::unchecked);
}

TangentVector::TangentVector(HyperboloidPoint base, MinkowskiVector dir)
    : base_(std::move(base)), dir_(std::move(dir)) {
  require_same_size(base_.size(), dir_.size(), "TangentVector");
  const double off = inplace::dot(dir_.coords(), base_.coords());
  if (std::abs(off) > tangent_tolerance(dir_.coords())) {
    throw std::invalid_argument("vector is not tangent at its base point: <v,p> = " +
                                std::to_string(off));
  }
}

TangentVector TangentVector::zero(HyperboloidPoint base) {
  auto dir = MinkowskiVector(std::vector<double>(base.size(), 0.0), detail::unchecked);
  return TangentVector(std::move(base), std::move(dir), detail::unchecked);
}

// ---------------------------------------------------------------------------

double minkowski_dot(std::span<const double> u, std::span<const double> v) {
  require_same_size(u.size(), v.size(), "minkowski_dot");
  if (u.empty()) throw std::invalid_argument("minkowski_dot: empty vectors");
  return inplace::dot(u, v);
}

double minkowski_dot(const MinkowskiVector& u, const MinkowskiVector& v) {
  return minkowski_dot(u.coords(), v.coords());
}

double tangent_norm(const TangentVector& v) {
  const double q = inplace::dot(v.coords(), v.coords());
  if (q < -tangent_tolerance(v.coords())) {
    throw NumericalError("tangent vector has negative squared norm " + std::to_string(q));
  }
  return std::sqrt(std::max(0.0, q));
}

double distance(const HyperboloidPoint& p, const HyperboloidPoint& q) {
  require_same_size(p.size(), q.size(), "distance");
  return distance_raw(p.coords(), q.coords());
}

TangentVector project_to_tangent(const HyperboloidPoint& p, const MinkowskiVector& v) {
  require_same_size(p.size(), v.size(), "project_to_tangent");
  std::vector<double> out(v.coords().begin(), v.coords().end());
  inplace::project_to_tangent(p.coords(), out);
  return TangentVector(p, MinkowskiVector(std::move(out), detail::unchecked), detail::unchecked);
}

MinkowskiVector euclidean_to_minkowski_gradient(MinkowskiVector g) {
  std::vector<double> out(g.coords().begin(), g.coords().end());
  out.back() = -out.back();
  return MinkowskiVector(std::move(out), detail::unchecked);
}

HyperboloidPoint exp_map(const TangentVector& v) {
  const double norm = tangent_norm(v);
  if (!std::isfinite(norm)) throw NumericalError("exp_map: tangent norm is not finite");
  std::vector<double> out(v.base().coords().begin(), v.base().coords().end());
  inplace::exp_map(out, v.coords(), norm);
  return HyperboloidPoint(MinkowskiVector(std::move(out), detail::unchecked), detail::unchecked);
}

HyperboloidPoint exp_map(const HyperboloidPoint& p, const TangentVector& v) {
  if (!(v.base() == p)) throw std::invalid_argument("exp_map: tangent vector is not based at p");
  return exp_map(v);
}

TangentVector log_map(const HyperboloidPoint& p, const HyperboloidPoint& q) {
  require_same_size(p.size(), q.size(), "log_map");
  const auto pc = p.coords();
  const auto qc = q.coords();
  const double d = distance_raw(pc, qc);
  if (d < kLogCutoff) return TangentVector::zero(p);

  // proj_p(q) = proj_p(q - p); the difference keeps precision for close points.
  std::vector<double> u(pc.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = qc[i] - pc[i];
  inplace::project_to_tangent(pc, u);
  const double len = std::sqrt(std::max(0.0, inplace::dot(u, u)));
  if (!(len > 0.0) || !std::isfinite(len)) return TangentVector::zero(p);
  const double scale = d / len;
  for (double& x : u) x *= scale;
  return TangentVector(p, MinkowskiVector(std::move(u), detail::unchecked), detail::unchecked);
}

TangentVector parallel_transport(const HyperboloidPoint& from, const HyperboloidPoint& to,
                                 const TangentVector& w) {
  require_same_size(from.size(), to.size(), "parallel_transport");
  if (!(w.base() == from)) {
    throw std::invalid_argument("parallel_transport: vector is not based at the start point");
  }
  const TangentVector v = log_map(from, to);
  const double d = std::sqrt(std::max(0.0, inplace::dot(v.coords(), v.coords())));
  if (d < kLogCutoff) return TangentVector(to, w.dir(), detail::unchecked);

  const auto p = from.coords();
  const auto vc = v.coords();
  const auto wc = w.coords();
  // <w, v^> (sinh d p + cosh d v^) + w - <w, v^> v^
  //   = w + <w, v^> (sinh d p + (cosh d - 1) v^)
  const double along = inplace::dot(wc, vc) / d;
  const double sh = std::sinh(d);
  const double half = std::sinh(0.5 * d);
  const double cosh_minus_one = 2.0 * half * half;
  std::vector<double> out(wc.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = wc[i] + along * (sh * p[i] + cosh_minus_one * vc[i] / d);
  }
  return TangentVector(to, MinkowskiVector(std::move(out), detail::unchecked), detail::unchecked);
}

HyperboloidPoint renormalize(const MinkowskiVector& x) {
  std::vector<double> out(x.coords().begin(), x.coords().end());
  inplace::renormalize(out);
  return HyperboloidPoint(MinkowskiVector(std::move(out), detail::unchecked), detail::unchecked);
}

HyperboloidPoint random_point_near_base(std::size_t n, double sigma, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("hyperboloid dimension must be at least 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::vector<double> x(n + 1);
  inplace::sample_near_base(std::span<double>(x), sigma, rng);
  return HyperboloidPoint(MinkowskiVector(std::move(x), detail::unchecked), detail::unchecked);
}

// ---------------------------------------------------------------------------

namespace inplace {

double dot(std::span<const double> u, std::span<const double> v) noexcept {
  const std::size_t n = u.size() - 1;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += u[i] * v[i];
  return s - u[n] * v[n];
}

void project_to_tangent(std::span<const double> p, std::span<double> v) noexcept {
  const double c = dot(p, v);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += c * p[i];
}

void renormalize(std::span<double> x) {
  const double q = dot(x, x);
  const double last = x[x.size() - 1];
  if (!(q < 0.0) || !(last > 0.0) || !std::isfinite(q)) {
    throw NumericalError("cannot renormalize onto the hyperboloid: <x,x> = " + std::to_string(q) +
                         ", x_n = " + std::to_string(last));
  }
  // A deviation at the rounding floor of the coordinates cannot be repaired by
  // scaling; doing so would only move far points radially by ~|x|^2 eps.
  double sq = 0.0;
  for (double c : x) sq += c * c;
  if (std::abs(q + 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() * sq) return;
  const double scale = 1.0 / std::sqrt(-q);
  for (double& c : x) c *= scale;
}

void repair(std::span<double> x) {
  const double q = dot(x, x);
  const double dev = q + 1.0;
  double sq = 0.0;
  for (double c : x) sq += c * c;
  if (!std::isfinite(q) || !(x[x.size() - 1] > 0.0) || !(std::abs(dev) <= kRepairLimit)) {
    renormalize(x);
    return;
  }
  // Below the rounding floor the correction is noise, and since it is not
  // tangent it would show up as a displacement of order dev |x| / 2.
  if (std::abs(dev) <= 4.0 * std::numeric_limits<double>::epsilon() * sq) return;
  // Smallest Euclidean move that zeroes the deviation to first order. Scaling
  // would shift far points radially by ~dev/2, which ruins their distances.
  const double step = dev / (2.0 * sq);
  const std::size_t n = x.size() - 1;
  for (std::size_t i = 0; i < n; ++i) x[i] -= step * x[i];
  x[n] += step * x[n];
}

void exp_map(std::span<double> p, std::span<const double> v, double norm) {
  if (!std::isfinite(norm)) throw NumericalError("exp_map: tangent norm is not finite");
  if (norm < kExpCutoff) return;
  const double ch = std::cosh(norm);
  const double sh = std::sinh(norm) / norm;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = ch * p[i] + sh * v[i];
  repair(p);
}

}  // namespace inplace

}  // namespace hsgns::geometry
