#ifndef HAWKES_GENERAL_MODEL_HPP
#define HAWKES_GENERAL_MODEL_HPP

#include <string>

#include "hawkes/kernels.hpp"

namespace hawkes {

/// Deterministic non-negative rate r(t) = scale * shape(t).
struct RateFunction {
  double scale = 0.0;
  TimeFactor shape = TimeFactor::constant(1.0);

  static RateFunction constant(double value) {
    return {value, TimeFactor::constant(1.0)};
  }
  double operator()(double t) const { return scale * shape.value(t); }
  double sup(double T) const { return std::abs(scale) * shape.sup_bounds(T)[0]; }
  bool is_zero() const {
    return scale == 0.0 || (shape.family() == TimeFactor::Family::Constant &&
                            shape.params()[0] == 0.0);
  }
};

/// Hawkes process with general immigrants:
///
///   lambda_t = mu(t) + sum_{T_n < t} Phi_t(t - T_n, X_n)
///                    + sum_{S_k < t} Psi_t(t - S_k, Y_k),
///
/// external events S_k arriving at rate rho(t) with marks Y_k ~ H, and
/// Hawkes marks X_n ~ G. `self` carries Phi and G, `external` Psi and H.
struct GeneralModel {
  RateFunction baseline = RateFunction::constant(1.0);
  RateFunction external_rate = RateFunction::constant(0.0);
  MarkKernel self;
  MarkKernel external = MarkKernel::none(MarkDistribution::point_mass(1.0));
  std::string id = "general";

  double intensity_floor(double t) const { return baseline(t); }
};

/// Checks rates, non-negativity of both kernels on [0, T] and the
/// exponential-moment condition for lambda <= lambda_max.
void validate_general_model(const GeneralModel& gm, double T,
                            double lambda_max = 1.0);

/// The standard model as a general model: Phi_t(a, x) = phi(a), Psi = 0.
GeneralModel standard_as_general(const OdeKernel& k, double mu);

}  // namespace hawkes

#endif  // HAWKES_GENERAL_MODEL_HPP
