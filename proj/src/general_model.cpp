#include "hawkes/general_model.hpp"

#include "hawkes/errors.hpp"

namespace hawkes {

void validate_general_model(const GeneralModel& gm, double T,
                            double lambda_max) {
  if (!(T > 0.0)) throw InvalidArgument("horizon must be positive");
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double t = T * i / n;
    if (gm.baseline(t) < 0.0 || gm.external_rate(t) < 0.0) {
      throw InvalidArgument("baseline and external rates must be non-negative");
    }
  }
  validate_mark_kernel(gm.self, T);
  validate_mark_kernel(gm.external, T);
  gm.self.check_moment_condition(lambda_max);
  gm.external.check_moment_condition(lambda_max);
}

GeneralModel standard_as_general(const OdeKernel& k, double mu) {
  GeneralModel gm;
  gm.baseline = RateFunction::constant(mu);
  gm.external_rate = RateFunction::constant(0.0);
  gm.self.base = k;
  gm.self.init_family = MarkKernel::InitFamily::Constant;
  gm.self.time_factor = TimeFactor::constant(1.0);
  gm.self.marks = MarkDistribution::point_mass(1.0);
  gm.id = "standard";
  return gm;
}

}  // namespace hawkes
