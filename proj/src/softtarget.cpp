#include "softtarget/softtarget.hpp"

#include <cmath>
#include <string>

#include "softtarget/errors.hpp"

namespace softtarget {

void SoftTargetConfig::validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw ValueError("SoftTargetConfig: beta must lie in [0, 1], got " + std::to_string(beta));
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ValueError("SoftTargetConfig: gamma must lie in [0, 1], got " + std::to_string(gamma));
    }
    if (epochs_per_step < 1) {
        throw ValueError("SoftTargetConfig: epochs_per_step must be >= 1");
    }
    if (total_epochs < burn_in) {
        throw ValueError("SoftTargetConfig: total_epochs (" + std::to_string(total_epochs) +
                         ") must be >= burn_in (" + std::to_string(burn_in) + ")");
    }
}

std::size_t SoftTargetConfig::time_steps() const noexcept {
    return (total_epochs - burn_in) / epochs_per_step;
}

std::size_t SoftTargetConfig::training_epochs() const noexcept {
    return burn_in + epochs_per_step * time_steps();
}

namespace {

void check_rows_are_distributions(const Matrix& m, const char* who) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row_ptr(r);
        double sum = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (row[c] < 0.0) {
                throw ValueError(std::string(who) + ": row " + std::to_string(r) +
                                 " has a negative entry");
            }
            sum += row[c];
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw ValueError(std::string(who) + ": row " + std::to_string(r) + " sums to " +
                             std::to_string(sum) + ", not 1 within 1e-6");
        }
    }
}

void check_rows_are_one_hot(const Matrix& m, const char* who) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row_ptr(r);
        std::size_t ones = 0;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (row[c] == 1.0) {
                ++ones;
            } else if (row[c] != 0.0) {
                throw ValueError(std::string(who) + ": row " + std::to_string(r) +
                                 " is not one-hot");
            }
        }
        if (ones != 1) {
            throw ValueError(std::string(who) + ": row " + std::to_string(r) + " has " +
                             std::to_string(ones) + " ones, expected exactly 1");
        }
    }
}

}  // namespace

SoftTargetState SoftTargetState::init(Matrix predictions, SoftTargetConfig config) {
    config.validate();
    check_rows_are_distributions(predictions, "SoftTargetState::init");
    SoftTargetState state;
    state.y_hat_ = std::move(predictions);
    state.t_ = 0;
    state.config_ = config;
    return state;
}

SoftTargetState SoftTargetState::restore(Matrix y_hat, std::size_t t, SoftTargetConfig config) {
    config.validate();
    SoftTargetState state;
    state.y_hat_ = std::move(y_hat);
    state.t_ = t;
    state.config_ = config;
    return state;
}

void SoftTargetState::update(const Matrix& predictions) {
    if (!predictions.same_shape(y_hat_)) {
        throw ShapeError("SoftTargetState::update: predictions are " + predictions.shape_str() +
                         " but the running average is " + y_hat_.shape_str());
    }
    const double beta = config_.beta;
    for (std::size_t i = 0; i < y_hat_.size(); ++i) {
        y_hat_.data()[i] = beta * y_hat_.data()[i] + (1.0 - beta) * predictions.data()[i];
    }
    ++t_;
}

Matrix SoftTargetState::blend(const Matrix& y_hard) const {
    if (!y_hard.same_shape(y_hat_)) {
        throw ShapeError("SoftTargetState::blend: hard labels are " + y_hard.shape_str() +
                         " but the running average is " + y_hat_.shape_str());
    }
    check_rows_are_one_hot(y_hard, "SoftTargetState::blend");
    const double gamma = config_.gamma;
    Matrix blended(y_hard.rows(), y_hard.cols());
    for (std::size_t i = 0; i < blended.size(); ++i) {
        blended.data()[i] = gamma * y_hat_.data()[i] + (1.0 - gamma) * y_hard.data()[i];
    }
    return blended;
}

std::vector<SchedulePhase> build_schedule(const SoftTargetConfig& config) {
    config.validate();
    std::vector<SchedulePhase> phases;
    phases.push_back({SchedulePhase::Kind::BurnIn, config.burn_in, 0});
    phases.push_back({SchedulePhase::Kind::Snapshot, 0, 0});
    for (std::size_t t = 1; t <= config.time_steps(); ++t) {
        phases.push_back({SchedulePhase::Kind::TimeStep, config.epochs_per_step, t});
    }
    return phases;
}

}  // namespace softtarget
