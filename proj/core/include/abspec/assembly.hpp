#pragma once

#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "abspec/mesh.hpp"

namespace abspec {

// Symmetric sparse matrix with the lower triangle stored.
class SymmetricSparse {
 public:
  SymmetricSparse() = default;
  explicit SymmetricSparse(Eigen::SparseMatrix<double> lower)
      : lower_(std::move(lower)) {}

  int dimension() const { return (int)lower_.rows(); }
  const Eigen::SparseMatrix<double>& lower() const { return lower_; }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    return lower_.selfadjointView<Eigen::Lower>() * x;
  }
  double quadratic_form(const Eigen::VectorXd& x) const {
    return x.dot(multiply(x));
  }
  Eigen::VectorXd row_sums() const {
    return multiply(Eigen::VectorXd::Ones(lower_.rows()));
  }

 private:
  Eigen::SparseMatrix<double> lower_;
};

enum class DofStatus : std::uint8_t { Free, Dirichlet, Slave };

// Entity -> global DOF bookkeeping. P1 DOFs are the vertices; P2 adds one
// DOF per edge, in canonical (sorted vertex pair) order.
struct DofMap {
  int order = 2;
  int n_vertices = 0;
  int n_dofs = 0;
  std::vector<std::array<int, 2>> edges;  // edge dof -> sorted vertex pair
  std::unordered_map<std::uint64_t, int> edge_dof;  // key(u,v) -> dof id
  std::vector<DofStatus> status;
  std::vector<int> master;  // slave dof -> master dof (couples with sign -1)

  int vertex_dof(int v) const { return v; }
  int edge_dof_of(int u, int v) const;
  int free_count() const;
};

struct FemSystem {
  SymmetricSparse K, M;
  DofMap dofmap;
};

// Element integrals are exact for the element order (P1 closed-form,
// P2 with 3-point gradients / 6-point mass quadrature).
FemSystem assemble(const Mesh& mesh, int order);
FemSystem assemble(const CutMesh& cm, int order);
FemSystem assemble(const CoverMesh& cover, int order);

struct ReducedSystem {
  Eigen::SparseMatrix<double> K, M;  // lower triangles
  std::vector<int> map;              // full dof -> reduced id, -1 eliminated
  std::vector<double> sign;          // fold sign per full dof
  int n = 0;
};

// Dirichlet elimination plus cut-pair folding (one physical DOF per pair,
// coupled with sign -1). The pole DOF is eliminated as u(a) = -u(a) = 0.
ReducedSystem reduce(const FemSystem& sys);

Eigen::VectorXd expand_to_full(const ReducedSystem& red,
                               const Eigen::VectorXd& v);

// Deck transformation lifted to the DOF level (vertex and edge DOFs).
std::vector<int> deck_dof_permutation(const CoverMesh& cover,
                                      const DofMap& dofmap);

// Finite element function on a mesh, for pointwise evaluation.
struct FemField {
  const Mesh* mesh = nullptr;
  const DofMap* dofmap = nullptr;
  Eigen::VectorXd values;  // full dof vector

  double eval(const Vec2& p) const;
};

// Coordinate text dump, 1-based lower triangle, "i j value".
void dump_matrix(std::ostream& os, const SymmetricSparse& m);

}  // namespace abspec
