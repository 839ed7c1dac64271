#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "tdtarget/errors.hpp"

namespace tdtarget {

/// Step-size rules used by the learners.
///
///  polynomial : numerator / (offset + i), i = t when an inner index is given, else k
///  geometric  : numerator * decay^k / (offset + t)
///  constant   : numerator
class StepSizeSchedule {
public:
    enum class Kind { polynomial, geometric, constant };

    static StepSizeSchedule polynomial(double numerator, double offset) {
        return StepSizeSchedule(Kind::polynomial, numerator, offset, 1.0);
    }
    static StepSizeSchedule geometric(double numerator, double offset, double decay) {
        return StepSizeSchedule(Kind::geometric, numerator, offset, decay);
    }
    static StepSizeSchedule constant(double value) { return StepSizeSchedule(Kind::constant, value, 0.0, 1.0); }

    Kind kind() const { return kind_; }
    double numerator() const { return numerator_; }
    double offset() const { return offset_; }
    double decay() const { return decay_; }

    double value(long long k, std::optional<long long> t = std::nullopt) const {
        if (k < 0 || (t && *t < 0)) {
            throw InvalidInput("step-size indices must be non-negative");
        }
        switch (kind_) {
        case Kind::polynomial:
            return numerator_ / (offset_ + static_cast<double>(t ? *t : k));
        case Kind::geometric:
            return numerator_ * std::pow(decay_, static_cast<double>(k)) / (offset_ + static_cast<double>(t.value_or(0)));
        case Kind::constant:
            return numerator_;
        }
        return 0.0;
    }

    /// sum a_k = inf and sum a_k^2 < inf along the iteration index.
    bool satisfies_robbins_monro() const { return kind_ == Kind::polynomial; }

    std::string describe() const {
        switch (kind_) {
        case Kind::polynomial:
            return "polynomial(" + fmt(numerator_) + "/(" + fmt(offset_) + "+i))";
        case Kind::geometric:
            return "geometric(" + fmt(numerator_) + "*" + fmt(decay_) + "^k/(" + fmt(offset_) + "+t))";
        case Kind::constant:
            return "constant(" + fmt(numerator_) + ")";
        }
        return {};
    }

private:
    StepSizeSchedule(Kind kind, double numerator, double offset, double decay)
        : kind_(kind), numerator_(numerator), offset_(offset), decay_(decay) {
        if (!(numerator_ > 0.0) || !std::isfinite(numerator_)) {
            throw InvalidInput("step-size numerator must be positive and finite");
        }
        if (kind_ != Kind::constant && !(offset_ > 0.0)) {
            throw InvalidInput("step-size offset must be positive so the first step is finite");
        }
        if (kind_ == Kind::geometric && !(decay_ > 0.0 && decay_ <= 1.0)) {
            throw InvalidInput("geometric decay must lie in (0, 1]");
        }
    }

    static std::string fmt(double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", x);
        return buf;
    }

    Kind kind_;
    double numerator_;
    double offset_;
    double decay_;
};

inline double schedule_value(const StepSizeSchedule& schedule, long long k, std::optional<long long> t = std::nullopt) {
    return schedule.value(k, t);
}

} // namespace tdtarget
