#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qlab/trajectory.hpp"

namespace qlab {

/**
Stepsize schedule producing values in [0, 1]. Three kinds:

 - constant(c):                alpha_t = c
 - global_polynomial(c, p):    alpha_t = c / (t + 1)^p
 - per_visit_polynomial(c, p): alpha_t = c / (n_t + 1)^p, where n_t counts
   prior visits of the pair updated at time t.

Constructors require c in (0, 1] and p >= 0, which keeps every produced value
inside [0, 1].
*/
class StepsizeSchedule {
  public:
    enum class Kind { constant, global_polynomial, per_visit_polynomial };

    static StepsizeSchedule constant(double c);
    static StepsizeSchedule global_polynomial(double c, double p);
    static StepsizeSchedule per_visit_polynomial(double c, double p);

    double at(std::int64_t t, std::int64_t visit_count_before) const;

    Kind kind() const { return kind_; }
    double c() const { return c_; }
    double p() const { return p_; }
    bool per_visit() const { return kind_ == Kind::per_visit_polynomial; }

    std::string describe() const;

  private:
    StepsizeSchedule(Kind kind, double c, double p);

    Kind kind_;
    double c_;
    double p_;
};

/// The stepsize applied at each step of the log, in time order. For per-visit
/// schedules the visit counter of each pair is replayed from the log itself.
std::vector<double> stepsizes_along(const TrajectoryLog& log,
                                    const StepsizeSchedule& schedule);

} // namespace qlab
