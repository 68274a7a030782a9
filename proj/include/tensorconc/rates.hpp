#pragma once

#include <cmath>
#include <stdexcept>

namespace tensorconc::rates {

inline constexpr double kGaussianSubgConstant = 1.6329931618554520654;  // sqrt(8/3)

/// Inputs for the rank-one tensor deviation rates. Implicit absolute
/// constants are set to 1; consumers compare empirical/theoretical ratios,
/// never absolute values.
struct TensorRateInputs {
  double op_norm = 1.0;    // largest eigenvalue
  double eff_rank = 1.0;   // trace / op_norm, >= 1
  double n = 1.0;          // sample size
  double p = 2.0;          // tensor order, >= 2
  double u = 1.0;          // tail parameter, >= 1 where used
  double k_subg = kGaussianSubgConstant;

  void validate() const {
    if (!(op_norm > 0) || !(eff_rank >= 1) || !(n >= 1) || !(p >= 2) || !(k_subg > 0))
      throw std::invalid_argument("invalid tensor rate inputs");
  }
};

/// Inputs for the function-class process rates.
struct ProcessRateInputs {
  double gamma = 0.0;      // chaining functional, >= 0
  double d_psi2 = 1.0;     // sup of the class's psi2 norms, > 0
  double n = 1.0;
  double p = 2.0;          // >= 3/2
  double u = 1.0;
  double m = 2.0;          // coordinate-norm exponent, >= 1

  void validate() const {
    if (!(gamma >= 0) || !(d_psi2 > 0) || !(n >= 1) || !(p >= 1.5))
      throw std::invalid_argument("invalid process rate inputs");
  }
};

inline double thm1_expectation_rate(const TensorRateInputs& in) {
  in.validate();
  return std::pow(in.k_subg, in.p) * std::pow(in.op_norm, in.p / 2) *
         (std::sqrt(in.eff_rank / in.n) + std::pow(in.eff_rank, in.p / 2) / in.n);
}

inline double thm1_tail_rate(const TensorRateInputs& in) {
  in.validate();
  if (!(in.u >= 1)) throw std::invalid_argument("tail parameter u must be >= 1");
  return std::pow(in.k_subg, in.p) * std::pow(in.op_norm, in.p / 2) *
         (std::sqrt(in.eff_rank / in.n) + std::pow(in.eff_rank, in.p / 2) / in.n +
          std::sqrt(in.u / in.n) + std::pow(in.u, in.p / 2) / in.n);
}

/// Matching lower rate for Gaussian data; same shape with the sub-Gaussian
/// constant dropped, exposed separately so sandwich checks can name both
/// sides.
inline double prop31_lower_rate(TensorRateInputs in) {
  in.k_subg = 1.0;
  return thm1_expectation_rate(in);
}

inline double thm2_expectation_rate(const ProcessRateInputs& in) {
  in.validate();
  if (!(in.p >= 2)) throw std::invalid_argument("process expectation rate needs p >= 2");
  return in.gamma * std::pow(in.d_psi2, in.p - 1) / std::sqrt(in.n) +
         std::pow(in.gamma, in.p) / in.n;
}

inline double thm2_tail_rate(const ProcessRateInputs& in) {
  in.validate();
  if (!(in.p >= 2) || !(in.u >= 1)) throw std::invalid_argument("need p >= 2 and u >= 1");
  return in.u * in.gamma * std::pow(in.d_psi2, in.p - 1) / std::sqrt(in.n) +
         std::pow(in.u, in.p) * std::pow(in.gamma, in.p) / in.n;
}

inline double thm2_alt_tail_rate(const ProcessRateInputs& in) {
  in.validate();
  if (!(in.p >= 2) || !(in.u >= 1)) throw std::invalid_argument("need p >= 2 and u >= 1");
  return in.gamma * std::pow(in.d_psi2, in.p - 1) / std::sqrt(in.n) +
         std::pow(in.gamma, in.p) / in.n +
         std::pow(in.d_psi2, in.p) *
             (std::sqrt(in.u / in.n) + std::pow(in.u, in.p / 2) / in.n);
}

/// Expectation rate valid down to p = 3/2. The extra N^{-3/4} term is kept
/// for all p; for p >= 2 it is dominated by the other two.
inline double remark25_rate(const ProcessRateInputs& in) {
  in.validate();
  const double base =
      in.gamma * std::pow(in.d_psi2, in.p - 1) / std::sqrt(in.n) +
      std::pow(in.gamma, in.p) / in.n;
  return base + std::pow(in.gamma, 1.5) * std::pow(in.d_psi2, in.p - 1.5) /
                    std::pow(in.n, 0.75);
}

inline double remark41_lm_tail_rate(const ProcessRateInputs& in) {
  in.validate();
  if (!(in.m >= 2) || !(in.u >= 1)) throw std::invalid_argument("need m >= 2 and u >= 1");
  return in.gamma + std::pow(in.n, 1.0 / in.m) * in.d_psi2 + in.d_psi2 * in.u;
}

/// Competitor rate driven by E max_i ||X_i||^p (supplied by the caller,
/// typically a Monte Carlo estimate).
inline double competing_guedon_rate(double op_norm, double p, double n,
                                    double max_norm_moment) {
  if (!(op_norm > 0) || !(p >= 1) || !(max_norm_moment >= 0))
    throw std::invalid_argument("invalid competitor rate inputs");
  if (!(n >= 2)) throw std::invalid_argument("competitor rate needs n >= 2");
  const double eps = (std::log(n) / n) * max_norm_moment / std::pow(op_norm, p / 2);
  return std::pow(op_norm, p / 2) * (std::sqrt(eps) + eps);
}

/// Competitor rate from metric-entropy estimates; carries log factors in
/// both n and the ambient dimension.
inline double competing_even_rate(double op_norm, double eff_rank, double n,
                                  double p, double dim) {
  if (!(op_norm > 0) || !(eff_rank >= 1) || !(p >= 1) || !(dim >= 1))
    throw std::invalid_argument("invalid competitor rate inputs");
  if (!(n >= 2)) throw std::invalid_argument("competitor rate needs n >= 2");
  return std::pow(op_norm, p / 2) *
         std::sqrt(std::pow(std::log(n), p) *
                   std::pow(eff_rank + std::log(dim), p + 1) / n);
}

/// Named alias for the order-2 rate (sample covariance deviation).
inline double kl_p2_rate(double op_norm, double eff_rank, double n) {
  TensorRateInputs in;
  in.op_norm = op_norm;
  in.eff_rank = eff_rank;
  in.n = n;
  in.p = 2.0;
  in.k_subg = 1.0;
  return thm1_expectation_rate(in);
}

}  // namespace tensorconc::rates
