#pragma once

#include <Eigen/Core>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "sgrte/sparse_space.hpp"

namespace sgrte {

// ---- triangles ---------------------------------------------------------------

/// Orthonormal basis of P_k on the reference triangle {r, s >= 0, r + s <= 1}
/// from Gram-Schmidt on 1, r, s, r^2, rs, s^2, ... Row i holds the monomial
/// coefficients of phi_i; the leading coefficient of each phi_i is positive.
struct TriangleBasis {
  int degree = 0;
  std::vector<std::array<int, 2>> exponents;  // (a, b) of r^a s^b
  Eigen::MatrixXd coeffs;

  int size() const { return static_cast<int>(exponents.size()); }
  void values(double r, double s, Eigen::VectorXd& out) const;
  /// rows: d/dr, d/ds
  void gradients(double r, double s, Eigen::MatrixXd& out) const;
};

TriangleBasis triangle_orthobasis(int k);

/// Exact int over the reference triangle of r^a s^b = a! b! / (a+b+2)!
double reference_triangle_moment(int a, int b);

struct WeightedPoint {
  Point x;
  double w;
};

/// Degree-k orthonormal space on a physical triangle (vertices counterclockwise).
class TriangleSpace {
 public:
  TriangleSpace(int k, const std::array<Point, 3>& vertices);

  int degree() const { return basis_->degree; }
  int size() const { return basis_->size(); }
  double area() const { return area_; }
  const std::array<Point, 3>& vertices() const { return v_; }
  const TriangleBasis& reference() const { return *basis_; }

  Point to_physical(double r, double s) const;
  Eigen::Vector2d to_reference(const Point& x) const;
  bool contains(const Point& x, double slack = 1e-12) const;

  void values(const Point& x, Eigen::VectorXd& out) const;
  /// rows: d/dx, d/dy
  void gradients(const Point& x, Eigen::MatrixXd& out) const;

  /// Collapsed Gauss rule with q points per direction, physical weights.
  std::vector<WeightedPoint> quadrature(int q) const;

  Eigen::VectorXd project(const ScalarField& f, int q = -1) const;
  double evaluate(const Eigen::VectorXd& coeffs, const Point& x) const;

 private:
  std::shared_ptr<const TriangleBasis> basis_;
  std::array<Point, 3> v_;
  double area_;
  Eigen::Matrix2d jac_, jac_inv_;
};

// ---- patches and topology ----------------------------------------------------

enum class PatchKind { box, triangle };

struct Patch {
  PatchKind kind = PatchKind::box;
  std::shared_ptr<const SparseSpace> box;
  std::shared_ptr<const TriangleSpace> triangle;
  long offset = 0;  // first global dof
  /// For box patches: side 2*axis + (0 low, 1 high) lies on the domain boundary.
  std::array<bool, 2 * kMaxDim> physical_side{};

  long size() const;
};

struct Element {
  int patch = 0;
  std::array<long, kMaxDim> cell{};  // fine cell of a box patch
  Point lo = Point::Zero(), hi = Point::Zero();  // bounding box
};

/// A face is the parallelogram origin + a e1 + b e2, a, b in [0,1] (e2 = 0 in 2-D).
/// The normal points out of `left`; right = -1 on the domain boundary.
struct Face {
  int left = -1, right = -1;
  Point origin = Point::Zero(), e1 = Point::Zero(), e2 = Point::Zero();
  Point normal = Point::Zero();
  double measure = 0.0;
  /// Inside one box patch or on one of its physical sides; handled by the
  /// tensor-product assembly path.
  bool structured = false;
};

struct MeshTopology {
  std::vector<Element> elements;
  std::vector<Face> interior;
  std::vector<Face> boundary;
};

struct Domain {
  std::string name;
  int dim = 2;
  int degree = 0;
  int level = 0;
  std::vector<Patch> patches;
  MeshTopology topology;
  long dofs = 0;

  /// Patch containing x (first match), or -1.
  int locate(const Point& x, double slack = 1e-12) const;
  double volume() const;
};

Domain make_unit_box(int d, int k, int N);
Domain make_box(int d, int k, int N, const BoxMap& map);
Domain make_lshape(int k, int N);
/// Square of half-width `half` (default radius / sqrt 2) plus eight triangles
/// filling the gap to the inscribed regular octagon.
Domain make_circle(int k, int N, double radius = 1.0, const Point& center = Point::Zero(), double half = -1);

/// Build faces for the given patches (2-D general matching; 3-D single boxes).
MeshTopology build_topology(int dim, std::vector<Patch>& patches);

/// Face quadrature with q Gauss points per face axis.
std::vector<WeightedPoint> face_quadrature(const Face& f, int dim, int q);

/// Default face/volume points per axis: max(k+2, 4).
inline int face_quadrature_points(int k) { return variable_quadrature_points(k); }

}  // namespace sgrte
