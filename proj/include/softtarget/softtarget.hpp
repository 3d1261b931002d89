#pragma once

#include <cstddef>
#include <vector>

#include "softtarget/matrix.hpp"

namespace softtarget {

/// Hyper-parameters of SoftTarget regularization.
///   beta            decay of the moving average of past predictions
///   gamma           weight of the moving average in the blended targets
///   burn_in         epochs trained on hard labels before the average is seeded (n_b)
///   epochs_per_step epochs trained on each fixed blended-target matrix (n_t)
///   total_epochs    overall epoch budget (n)
struct SoftTargetConfig {
    double beta = 0.7;
    double gamma = 0.5;
    std::size_t burn_in = 2;
    std::size_t epochs_per_step = 2;
    std::size_t total_epochs = 100;

    void validate() const;  // throws ValueError

    /// floor((total_epochs - burn_in) / epochs_per_step).
    std::size_t time_steps() const noexcept;

    /// Epochs actually trained: burn_in + epochs_per_step * time_steps().
    /// Remainder epochs that do not fill a whole time-step are dropped.
    std::size_t training_epochs() const noexcept;
};

/// The running exponential moving average of the model's past soft predictions
/// over the full training set, plus the time-step counter. Rows stay aligned
/// with one fixed canonical sample order for the whole run; shuffling must
/// permute index views, never this matrix.
class SoftTargetState {
public:
    /// Seeds the average with the model's predictions (taken after burn-in).
    /// Every row must be a probability distribution: entries >= 0, sum within
    /// 1e-6 of 1. t starts at 0.
    static SoftTargetState init(Matrix predictions, SoftTargetConfig config);

    /// One moving-average step: y_hat <- beta * y_hat + (1 - beta) * predictions.
    /// Increments t. Shapes must match.
    void update(const Matrix& predictions);

    /// Blended targets: gamma * y_hat + (1 - gamma) * y_hard. y_hard rows must
    /// be one-hot. Hard labels are never mutated; a fresh matrix is returned.
    Matrix blend(const Matrix& y_hard) const;

    const Matrix& y_hat() const noexcept { return y_hat_; }
    std::size_t t() const noexcept { return t_; }
    const SoftTargetConfig& config() const noexcept { return config_; }

    /// Rebuilds a state from checkpointed fields, skipping the seeding contract.
    static SoftTargetState restore(Matrix y_hat, std::size_t t, SoftTargetConfig config);

private:
    SoftTargetState() = default;
    Matrix y_hat_;
    std::size_t t_ = 0;
    SoftTargetConfig config_;
};

/// One entry of the training schedule.
///   BurnIn    `epochs` epochs on hard labels
///   Snapshot  capture the model's predictions as the initial average
///   TimeStep  refresh predictions, update the average, blend targets, then
///             train `epochs` epochs on the blend; `index` is the step's t
struct SchedulePhase {
    enum class Kind { BurnIn, Snapshot, TimeStep };
    Kind kind;
    std::size_t epochs = 0;
    std::size_t index = 0;
};

/// Expands a config into the ordered phase list: BurnIn, Snapshot, then
/// time_steps() TimeStep entries.
std::vector<SchedulePhase> build_schedule(const SoftTargetConfig& config);

}  // namespace softtarget
