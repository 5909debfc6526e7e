#pragma once

// Spatial port correlation: the Jakes reference matrix, its spectrum, and the
// block-diagonal equicorrelation approximation used by the outage engine.

#include <cstddef>
#include <span>
#include <vector>

namespace fama::correlation {

enum class CorrelationModel { jakes, constant };

struct CorrelationSpec {
  CorrelationModel model = CorrelationModel::jakes;
  int ports = 2;          // N
  double aperture = 1.0;  // W, in wavelengths
  double mu = 0.0;        // constant-model amplitude coefficient; ignored for jakes

  void validate() const;
};

/// Dense symmetric matrix stored row-major.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double trace() const;
  /// Largest |a_ij - a_ji|.
  double asymmetry() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Partition of N ports into B consecutive equicorrelated blocks.
///
/// Ports are assigned to blocks in order: the first lengths[0] ports form
/// block 0, and so on. delta is the intra-block power correlation and lies
/// strictly inside (0, 1).
struct BlockStructure {
  std::vector<int> lengths;
  double delta = 0.97;
  double rho_th = 1.0;
  /// Eigenvalues that produced the partition (empty for the constant model).
  std::vector<double> eigenvalues_used;

  int count() const { return static_cast<int>(lengths.size()); }
  int ports() const;
  /// Block index b(n) of each port.
  std::vector<int> port_to_block() const;
  void validate() const;
};

inline constexpr double kDefaultDelta = 0.97;
inline constexpr double kDefaultRhoTh = 1.0;

/// [Sigma]_{nk} = J0(2 pi (n - k) W / (N - 1)).
SymmetricMatrix jakes_matrix(const CorrelationSpec& spec);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted in
/// descending order.
std::vector<double> symmetric_eigenvalues(const SymmetricMatrix& matrix);

/// Block structure from the dominant eigenvalues of a reference correlation
/// matrix: B = #{lambda >= rho_th}, and each block length inverts the dominant
/// eigenvalue 1 + (L - 1) delta of an L x L equicorrelated block. Rounding
/// residue is repaired one port at a time in descending-eigenvalue order.
BlockStructure block_partition(std::span<const double> eigenvalues, int ports, double delta,
                               double rho_th);

/// Single block spanning all ports: the constant-correlation model.
BlockStructure constant_structure(int ports, double delta);

/// Mean Jakes correlation over a continuous aperture of W wavelengths,
///   A(W) = 2 int_0^1 (1 - s) J0(2 pi W s) ds.
double aperture_mean_correlation(double aperture);

/// mu^2 = sqrt(A(W)) of the constant-correlation model, i.e.
/// sqrt(2) sqrt(1F2(1/2; 1, 3/2; -pi^2 W^2) - J1(2 pi W) / (2 pi W)).
double constant_model_mu2(double aperture);

/// Convenience: resolves a CorrelationSpec into the block structure used by
/// the outage engine (Jakes eigen-partition, or a single block with
/// delta = mu^2 for the constant model, mu^2 from the aperture when mu = 0).
BlockStructure resolve_blocks(const CorrelationSpec& spec, double delta = kDefaultDelta,
                              double rho_th = kDefaultRhoTh);

}  // namespace fama::correlation
