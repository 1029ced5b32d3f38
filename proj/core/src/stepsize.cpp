#include "qlab/stepsize.hpp"

#include <cmath>
#include <stdexcept>

namespace qlab {

StepsizeSchedule::StepsizeSchedule(Kind kind, double c, double p)
    : kind_(kind), c_(c), p_(p) {
    if (!(c > 0.0 && c <= 1.0))
        throw std::invalid_argument("stepsize scale must lie in (0, 1]");
    if (!(p >= 0.0))
        throw std::invalid_argument("stepsize exponent must be nonnegative");
}

StepsizeSchedule StepsizeSchedule::constant(double c) {
    return {Kind::constant, c, 0.0};
}

StepsizeSchedule StepsizeSchedule::global_polynomial(double c, double p) {
    return {Kind::global_polynomial, c, p};
}

StepsizeSchedule StepsizeSchedule::per_visit_polynomial(double c, double p) {
    return {Kind::per_visit_polynomial, c, p};
}

double StepsizeSchedule::at(std::int64_t t,
                            std::int64_t visit_count_before) const {
    switch (kind_) {
        case Kind::constant:
            return c_;
        case Kind::global_polynomial:
            return c_ / std::pow(static_cast<double>(t) + 1.0, p_);
        case Kind::per_visit_polynomial:
            return c_ /
                   std::pow(static_cast<double>(visit_count_before) + 1.0, p_);
    }
    return c_;
}

std::string StepsizeSchedule::describe() const {
    switch (kind_) {
        case Kind::constant:
            return "constant(" + std::to_string(c_) + ")";
        case Kind::global_polynomial:
            return "global_polynomial(" + std::to_string(c_) + ", " +
                   std::to_string(p_) + ")";
        case Kind::per_visit_polynomial:
            return "per_visit_polynomial(" + std::to_string(c_) + ", " +
                   std::to_string(p_) + ")";
    }
    return "";
}

std::vector<double> stepsizes_along(const TrajectoryLog& log,
                                    const StepsizeSchedule& schedule) {
    std::vector<double> alphas(static_cast<std::size_t>(log.size()));
    std::vector<std::int64_t> visits(
        static_cast<std::size_t>(log.n_states()) * log.n_actions(), 0);
    for (std::int64_t t = 0; t < log.size(); ++t) {
        const Transition& tr = log.step(t);
        const std::size_t pair =
            static_cast<std::size_t>(tr.s) * log.n_actions() + tr.a;
        alphas[static_cast<std::size_t>(t)] = schedule.at(t, visits[pair]);
        ++visits[pair];
    }
    return alphas;
}

} // namespace qlab
