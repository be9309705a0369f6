#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace hsgns::geometry {

// Geometry of the hyperboloid model of hyperbolic n-space, embedded in
// Minkowski space R^(n,1). A vector has n+1 coordinates; the first n are
// space-like and the last one carries the negative sign in the bilinear form.
//
// All functions here are pure and may be called concurrently.

/// Allowed |<x,x> + 1| for a point to count as lying on the hyperboloid.
inline constexpr double kConstraintTolerance = 1e-5;
/// Base tolerance for |<v,p>| of a tangent vector, scaled by max(1, |v|_inf).
inline constexpr double kTangentTolerance = 1e-9;
/// Tangent vectors shorter than this are treated as zero by exp_map.
inline constexpr double kExpCutoff = 1e-12;
/// Point pairs closer than this are treated as identical by log_map and
/// parallel_transport.
inline constexpr double kLogCutoff = 1e-9;
/// Deviations |<x,x> + 1| up to this are repaired by a first-order shift in
/// exp_map; larger ones fall back to renormalize.
inline constexpr double kRepairLimit = 1e-6;

namespace detail {
// Skips invariant checks; for results whose invariants hold by construction.
struct UncheckedTag {};
inline constexpr UncheckedTag unchecked{};
}  // namespace detail

class MinkowskiVector {
 public:
  /// Throws std::invalid_argument unless coords has at least two entries,
  /// all finite.
  explicit MinkowskiVector(std::vector<double> coords);
  MinkowskiVector(std::vector<double> coords, detail::UncheckedTag) noexcept
      : coords_(std::move(coords)) {}

  static MinkowskiVector zeros(std::size_t ambient_size);

  std::size_t size() const noexcept { return coords_.size(); }
  /// Intrinsic dimension n of the hyperboloid this vector's space houses.
  std::size_t dim() const noexcept { return coords_.size() - 1; }

  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const MinkowskiVector&, const MinkowskiVector&) = default;

 private:
  std::vector<double> coords_;
};

/// A point on the upper sheet {x : <x,x> = -1, x_n > 0}.
class HyperboloidPoint {
 public:
  /// Validates the constraint within `tolerance` and x_n >= 1 (up to the same
  /// tolerance). Throws std::invalid_argument otherwise.
  static HyperboloidPoint from_coords(MinkowskiVector coords,
                                      double tolerance = kConstraintTolerance);
  /// The base point (0, ..., 0, 1) of H^n.
  static HyperboloidPoint origin(std::size_t n);

  HyperboloidPoint(MinkowskiVector coords, detail::UncheckedTag) noexcept
      : coords_(std::move(coords)) {}

  std::size_t dim() const noexcept { return coords_.dim(); }
  std::size_t size() const noexcept { return coords_.size(); }
  const MinkowskiVector& vector() const noexcept { return coords_; }
  std::span<const double> coords() const noexcept { return coords_.coords(); }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const HyperboloidPoint&, const HyperboloidPoint&) = default;

 private:
  MinkowskiVector coords_;
};

/// A vector in the tangent space at `base`, i.e. Minkowski-orthogonal to it.
class TangentVector {
 public:
  /// Throws std::invalid_argument if dimensions differ or |<dir, base>| exceeds
  /// kTangentTolerance * max(1, |dir|_inf).
  TangentVector(HyperboloidPoint base, MinkowskiVector dir);
  TangentVector(HyperboloidPoint base, MinkowskiVector dir, detail::UncheckedTag) noexcept
      : base_(std::move(base)), dir_(std::move(dir)) {}

  static TangentVector zero(HyperboloidPoint base);

  const HyperboloidPoint& base() const noexcept { return base_; }
  const MinkowskiVector& dir() const noexcept { return dir_; }
  std::span<const double> coords() const noexcept { return dir_.coords(); }

 private:
  HyperboloidPoint base_;
  MinkowskiVector dir_;
};

// ---------------------------------------------------------------------------
// Operations on typed values.

/// sum_{i<n} u_i v_i - u_n v_n. Throws std::invalid_argument on size mismatch.
double minkowski_dot(std::span<const double> u, std::span<const double> v);
double minkowski_dot(const MinkowskiVector& u, const MinkowskiVector& v);

/// sqrt(<v,v>), clamped at zero. Throws NumericalError if <v,v> is below
/// -kTangentTolerance, since such a vector cannot be tangent to H^n.
double tangent_norm(const TangentVector& v);

/// Hyperbolic distance arccosh(-<p,q>). Near-coincident points go through
/// the equivalent 2 asinh(|q - p| / 2), which does not lose precision to
/// cancellation in -<p,q> - 1.
double distance(const HyperboloidPoint& p, const HyperboloidPoint& q);

/// v + <p,v> p.
TangentVector project_to_tangent(const HyperboloidPoint& p, const MinkowskiVector& v);

/// Converts Euclidean partial derivatives into the Minkowski gradient by
/// flipping the sign of the last coordinate.
MinkowskiVector euclidean_to_minkowski_gradient(MinkowskiVector g);

/// End point of the geodesic from v.base() with initial velocity v, after
/// unit time: cosh|v| p + sinh|v| v/|v|. The result is renormalized onto H^n.
HyperboloidPoint exp_map(const TangentVector& v);
/// As above; `p` must equal v.base().
HyperboloidPoint exp_map(const HyperboloidPoint& p, const TangentVector& v);

/// Inverse of exp_map: the tangent vector at p of length distance(p,q)
/// pointing towards q. Zero when the points are within kLogCutoff.
TangentVector log_map(const HyperboloidPoint& p, const HyperboloidPoint& q);

/// Parallel transport of w (based at `from`) along the geodesic to `to`.
/// Preserves Minkowski products between transported vectors.
TangentVector parallel_transport(const HyperboloidPoint& from, const HyperboloidPoint& to,
                                 const TangentVector& w);

/// x / sqrt(-<x,x>). Throws NumericalError unless <x,x> < 0 and x_n > 0.
HyperboloidPoint renormalize(const MinkowskiVector& x);

/// Space-like coordinates drawn i.i.d. from N(0, sigma^2), last coordinate
/// chosen so the point lies on H^n.
HyperboloidPoint random_point_near_base(std::size_t n, double sigma, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Allocation-free kernels over raw coordinate spans. The trainer calls these
// on rows of an embedding matrix; the typed functions above are built on them.
namespace inplace {

double dot(std::span<const double> u, std::span<const double> v) noexcept;

/// v <- v + <p,v> p
void project_to_tangent(std::span<const double> p, std::span<double> v) noexcept;

/// Throws NumericalError when x cannot be scaled onto the upper sheet.
void renormalize(std::span<double> x);

/// Moves x onto the hyperboloid. Small deviations take the smallest
/// Euclidean correction, which keeps distances to nearby points intact;
/// deviations at the rounding floor (4 eps |x|^2) are left alone.
void repair(std::span<double> x);

/// p <- repair(cosh(|v|) p + sinh(|v|) v/|v|) where v is tangent at p
/// and `norm` = |v|. A norm below kExpCutoff leaves p unchanged.
void exp_map(std::span<double> p, std::span<const double> v, double norm);

/// Writes the space-like coordinates from N(0, sigma^2) and sets the last so
/// that <x,x> = -1.
template <class URBG>
void sample_near_base(std::span<double> x, double sigma, URBG& rng) {
  double space = 0.0;
  if (sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      x[i] = normal(rng);
      space += x[i] * x[i];
    }
  } else {
    for (std::size_t i = 0; i + 1 < x.size(); ++i) x[i] = 0.0;
  }
  x[x.size() - 1] = std::sqrt(1.0 + space);
}

}  // namespace inplace

}  // namespace hsgns::geometry
