#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "sgrte/domains.hpp"
#include "sgrte/ordinates.hpp"
#include "sgrte/scattering.hpp"

namespace sgrte {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;
/// Function of position and direction, e.g. a source f(x, omega).
using PhaseSpaceField = std::function<double(const Point&, const Direction&)>;

/// Which terms of the per-direction operator to assemble.
struct OperatorTerms {
  bool mass = true;
  bool advection = true;  // volume term -u (omega . grad v)
  bool average = true;    // {omega u} . [[v]] on interior and outflow faces
  bool penalty = true;    // theta0 |omega . n| [[u]] . [[v]] on interior faces
};

/// 1-D hierarchical matrices on [0,1] (trial column, test row).
struct AxisOperators {
  SpMat volume;   // int phi_q phi_p'
  SpMat average;  // sum over interior nodes of [[phi_p]] {phi_q}
  SpMat penalty;  // sum over interior nodes of [[phi_p]] [[phi_q]]
  SpMat low;      // phi_p(0) phi_q(0)
  SpMat high;     // phi_p(1) phi_q(1)
  Eigen::VectorXd trace_low, trace_high;
};

AxisOperators build_axis_operators(const HierarchicalBasis1D& basis);

/// Direction-independent data for assembling on a domain.
class AssemblyPlan {
 public:
  explicit AssemblyPlan(const Domain& domain);

  const Domain& domain() const { return *domain_; }
  long size() const { return domain_->dofs; }

  /// Transport operator for direction omega: sigma_t * mass, advection, faces.
  SpMat transport(const Direction& omega, double sigma_t, double theta0, const OperatorTerms& terms = {}) const;
  void transport_triplets(const Direction& omega, double sigma_t, double theta0, const OperatorTerms& terms,
                          Triplets& out) const;

  /// int f(., omega) phi_n - int_{inflow} (omega . n) alpha phi_n
  Eigen::VectorXd load(const Direction& omega, const PhaseSpaceField& source, const PhaseSpaceField& inflow,
                       bool zero_source = false, bool zero_inflow = false) const;

 private:
  struct Group {
    std::vector<long> dofs;  // patch-local dofs sharing all other-axis indices
  };
  struct BoxData {
    int patch;
    std::shared_ptr<const AxisOperators> ops;
    std::array<std::vector<Group>, kMaxDim> groups;
  };
  struct SideValues {
    std::vector<long> dofs;  // global
    Eigen::MatrixXd V;       // quadrature points x dofs
  };
  struct FaceData {
    Point normal;
    Eigen::VectorXd weights;
    std::vector<Point> points;
    SideValues left, right;
    bool boundary = false;
  };
  struct TriangleData {
    int patch;
    Eigen::MatrixXd gx, gy;  // int phi_q d_x phi_p, int phi_q d_y phi_p
  };

  void expand_axis(const BoxData& b, int axis, const SpMat& A, Triplets& out) const;
  SideValues side_values(int elem, const std::vector<Point>& pts) const;

  const Domain* domain_;
  std::vector<BoxData> boxes_;
  std::vector<TriangleData> triangles_;
  std::vector<FaceData> faces_;
};

/// Per-direction blocks D_l = A_l - B_l^(l) + C_l with the scattering coupling
/// kept factored as sigma_s * G (the sigma_s-weighted mass is sigma_s I).
struct BlockSystem {
  int L = 0;
  long M = 0;
  std::vector<SpMat> D;
  std::vector<Eigen::VectorXd> F;
  Eigen::MatrixXd G;
  double sigma_s = 0.0;

  long dimension() const { return M * L; }
  /// Entries of the global (ML x ML) matrix; coupling blocks are diagonal.
  long nonzeros() const;
  double sparsity_ratio() const { return 1.0 - double(nonzeros()) / (double(dimension()) * double(dimension())); }
  bool coupled() const;

  /// y = (global matrix) x, x and y concatenated by direction.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd rhs() const;
};

struct SystemInputs {
  double sigma_t = 1.0;
  double sigma_s = 0.0;
  double theta0 = 1.0;
  PhaseSpaceField source;
  PhaseSpaceField inflow;
  bool zero_source = false;
  bool zero_inflow = false;
};

BlockSystem build_system(const AssemblyPlan& plan, const OrdinateSet& set, const KernelMatrix& kernel,
                         const SystemInputs& in);

/// Coordinate triplets (row col value, 17 significant digits) of the global
/// matrix followed by a summary line.
void write_matrix(std::ostream& os, const BlockSystem& sys);
void write_sparsity_summary(std::ostream& os, const BlockSystem& sys);

}  // namespace sgrte
