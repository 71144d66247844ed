#pragma once

// Tensor-train (TT) and matrix product operator (MPO) formats, plus the
// dense-facing operations on them: contraction, sequential-SVD
// decomposition, rounding, operator application and the analytic gradient
// of a quadratic loss with respect to every core.
//
// Core layout is (r_left, mode, r_right) row-major. MPO cores are
// (s_left, out, in, s_right) row-major.

#include <cstddef>
#include <vector>

#include "tnp/dense_tensor.hpp"

namespace tnp {

/// Upper bound on dense elements any single contraction may materialize.
inline constexpr std::size_t kDefaultElementBudget = std::size_t{1} << 26;

class TTFormat {
 public:
  TTFormat() = default;
  /// Validates boundary ranks == 1 and adjacent rank agreement.
  explicit TTFormat(std::vector<DenseTensor> cores);

  std::size_t order() const { return cores_.size(); }
  const DenseTensor& core(std::size_t k) const { return cores_.at(k); }
  const std::vector<DenseTensor>& cores() const { return cores_; }

  /// (r_0, ..., r_D) with r_0 == r_D == 1.
  std::vector<std::size_t> ranks() const;
  Shape mode_sizes() const;
  std::size_t max_rank() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const TTFormat&, const TTFormat&) = default;

 private:
  std::vector<DenseTensor> cores_;
};

class MPOFormat {
 public:
  MPOFormat() = default;
  explicit MPOFormat(std::vector<DenseTensor> cores);

  std::size_t order() const { return cores_.size(); }
  const DenseTensor& core(std::size_t k) const { return cores_.at(k); }
  const std::vector<DenseTensor>& cores() const { return cores_; }
  std::vector<std::size_t> ranks() const;
  Shape input_dims() const;
  Shape output_dims() const;

 private:
  std::vector<DenseTensor> cores_;
};

DenseTensor tt_contract(const TTFormat& tt,
                        std::size_t element_budget = kDefaultElementBudget);

/// Sequential truncated SVD. Each unfolding keeps the smallest rank whose
/// discarded singular values have norm <= tol * (norm of all of them),
/// capped at max_rank. Numerically zero singular values are always dropped.
TTFormat tt_svd(const DenseTensor& x, std::size_t max_rank, double tol);

/// Right-to-left QR orthogonalization, then left-to-right truncated SVD.
/// The result is left-orthogonal except for its last core.
TTFormat tt_round(const TTFormat& tt, std::size_t max_rank, double tol);

/// Rescales cores to equal Frobenius norm without changing the tensor.
TTFormat tt_balance(const TTFormat& tt);

/// Applies op to tt. Trailing op cores with input dim 1 beyond tt's order
/// act as output-only terminals and are paired with implicit unit cores.
/// Output ranks are op_rank * tt_rank, with no rounding.
TTFormat mpo_apply(const MPOFormat& op, const TTFormat& tt);

/// Dense (prod out) x (prod in) matrix of an operator, row-major.
DenseTensor mpo_to_dense(const MPOFormat& op,
                         std::size_t element_budget = kDefaultElementBudget);

/// Gradient of 0.5 * ||tt_contract(tt) - target||^2 with respect to every
/// core, given residual = tt_contract(tt) - target. The map is linear in
/// residual, so any tensor-space gradient can be pulled back this way.
std::vector<DenseTensor> mse_core_gradients(const TTFormat& tt,
                                            const DenseTensor& residual);

/// Returns tt with core k replaced by core_k + step * direction_k.
TTFormat tt_axpy(const TTFormat& tt, double step,
                 const std::vector<DenseTensor>& direction);

}  // namespace tnp
