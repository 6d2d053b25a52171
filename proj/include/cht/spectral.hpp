// Discrete Neumann Laplacian, its cosine eigenbasis, implicit Helmholtz
// solves, and the norms used by the diagnostics.
#pragma once

#include <memory>
#include <vector>

#include "cht/grid.hpp"

namespace cht {

// Eigen-decomposition machinery for A = -Laplacian with homogeneous Neumann
// conditions on a rectangular cell-centered grid. The basis vectors are the
// type-II cosine modes v_k(j) = cos(pi k (j+1/2)/N); eigenvalues per axis are
// nu_k = (2/h^2)(1 - cos(pi k/N)). Transforms are scaled so that
// sum_k fhat_k^2 equals the L2 norm squared of the field (cell-volume weight).
class CosineBasis {
 public:
  // Shared, cached per grid signature. Plan creation is serialized; execution
  // on caller-owned buffers is thread-safe.
  static std::shared_ptr<const CosineBasis> get(const Grid& grid);

  ~CosineBasis();
  CosineBasis(const CosineBasis&) = delete;
  CosineBasis& operator=(const CosineBasis&) = delete;

  const Grid& grid() const { return grid_; }

  // Coefficients in row-major mode order (k_y * nx + k_x in 2D).
  void forward(const Field& f, std::vector<double>& coeffs) const;
  void inverse(const std::vector<double>& coeffs, Field& f) const;

  // Eigenvalues nu >= 0 of -Laplacian, aligned with the coefficient layout;
  // nu[0] == 0 exactly.
  const std::vector<double>& eigenvalues() const { return nu_; }

 private:
  explicit CosineBasis(const Grid& grid);

  Grid grid_;
  std::vector<double> nu_;
  std::vector<double> fwd_scale_;  // per-coefficient forward scaling
  std::vector<double> inv_scale_;  // per-coefficient pre-inverse scaling
  void* plan_fwd_ = nullptr;       // fftw_plan, kept opaque here
  void* plan_inv_ = nullptr;
};

// Second-order centered stencil with ghost-cell reflection (the ghost value
// equals the boundary cell value), encoding homogeneous Neumann conditions.
Field laplacian(const Field& f);

// Solves (a I - b Laplacian) x = rhs exactly per cosine mode. a > 0, b >= 0.
Field helmholtz_solve(double a, double b, const Field& rhs);

struct FieldNorms {
  double l2 = 0;       // sqrt(sum f^2 h^d)
  double h1_semi = 0;  // face-difference gradient seminorm
  double mean = 0;
  double h1_dual = 0;  // sqrt(sum_{k!=0} fhat_k^2/nu_k + fhat_0^2)
};

FieldNorms norms(const Field& f);

// sqrt(l2^2 + h1_semi^2)
double h1_norm(const Field& f);

// Squared gradient seminorm: sum over faces of ((f_r - f_l)/h)^2 * cell volume.
// Equals <-Laplacian f, f> in the discrete L2 inner product.
double h1_semi_sq(const Field& f);

// (H^1)' norm of f, per the cosine-coefficient formula in FieldNorms.
double h1_dual_norm(const Field& f);

// Cell-centered cosine eigenmode v_k (unnormalized, amplitude 1).
Field eigenmode(const Grid& g, int kx, int ky = 0);

// Eigenvalue of -Laplacian for mode (kx, ky).
double eigenvalue(const Grid& g, int kx, int ky = 0);

}  // namespace cht
