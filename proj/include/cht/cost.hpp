// Cost functional data: weights, tracking targets, and the maximal
// treatment horizon.
#pragma once

#include <stdexcept>
#include <vector>

#include "cht/grid.hpp"

namespace cht {

// Space-time target, either constant in time or one frame per solver level.
class TimeTarget {
 public:
  TimeTarget() = default;

  static TimeTarget constant_field(Field f) {
    TimeTarget t;
    t.frames_.push_back(std::move(f));
    return t;
  }
  static TimeTarget from_levels(std::vector<Field> frames) {
    if (frames.empty()) throw std::invalid_argument("TimeTarget: no frames");
    TimeTarget t;
    t.frames_ = std::move(frames);
    return t;
  }

  bool empty() const { return frames_.empty(); }
  bool constant() const { return frames_.size() == 1; }
  const Field& at(long level) const {
    if (frames_.empty()) throw std::logic_error("TimeTarget: empty target");
    return constant() ? frames_.front() : frames_.at(static_cast<std::size_t>(level));
  }
  long levels() const { return static_cast<long>(frames_.size()); }

 private:
  std::vector<Field> frames_;
};

struct CostSpec {
  double beta_Q = 0;      // phi tracking on (0, tau)
  double beta_Omega = 0;  // terminal phi tracking
  double alpha_Q = 0;     // sigma tracking on (0, tau)
  double beta_S = 0;      // tumor size at tau: int (1 + phi(tau)) / 2
  double beta_u = 0;      // control cost on (0, T)
  double beta_T = 0;      // treatment-time penalty
  TimeTarget phi_Q;
  TimeTarget sigma_Q;
  Field phi_Omega;
  double T = 1.0;

  // Full validation: (C1) plus target structure. The adjoint solve accepts
  // all-zero weights (a legal linear problem), so it checks targets only.
  void validate(const Grid& g) const {
    if (beta_Q + beta_Omega + alpha_Q + beta_S + beta_u + beta_T == 0.0)
      throw std::invalid_argument("CostSpec: at least one weight must be positive");
    validate_targets(g);
  }

  void validate_targets(const Grid& g) const {
    if (beta_Q < 0 || beta_Omega < 0 || alpha_Q < 0 || beta_S < 0 || beta_u < 0 ||
        beta_T < 0)
      throw std::invalid_argument("CostSpec: weights must be nonnegative");
    if (!(T > 0.0)) throw std::invalid_argument("CostSpec: T must be positive");
    if (beta_Q > 0) {
      if (phi_Q.empty()) throw std::invalid_argument("CostSpec: beta_Q > 0 needs phi_Q");
      if (phi_Q.at(0).grid != g) throw std::invalid_argument("CostSpec: phi_Q grid mismatch");
      if (!phi_Q.at(0).all_finite())
        throw std::invalid_argument("CostSpec: phi_Q must be finite");
    }
    if (alpha_Q > 0) {
      if (sigma_Q.empty()) throw std::invalid_argument("CostSpec: alpha_Q > 0 needs sigma_Q");
      if (sigma_Q.at(0).grid != g)
        throw std::invalid_argument("CostSpec: sigma_Q grid mismatch");
      if (!sigma_Q.at(0).all_finite())
        throw std::invalid_argument("CostSpec: sigma_Q must be finite");
    }
    if (beta_Omega > 0) {
      if (phi_Omega.values.empty())
        throw std::invalid_argument("CostSpec: beta_Omega > 0 needs phi_Omega");
      if (phi_Omega.grid != g)
        throw std::invalid_argument("CostSpec: phi_Omega grid mismatch");
      if (!phi_Omega.all_finite())
        throw std::invalid_argument("CostSpec: phi_Omega must be finite");
    }
  }
};

}  // namespace cht
