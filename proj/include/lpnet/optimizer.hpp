#pragma once

#include <string>
#include <vector>

#include "lpnet/layers.hpp"

namespace lpnet {

/// One learning-rate rescale, applied once when the given epoch begins.
struct ScheduleEntry {
    std::size_t epoch;
    double multiplier;
};

/// SGD with classical momentum and decoupled-from-schedule L2:
///   v <- m*v - lr*(g + l2*p)
///   p <- p + v
/// Parameters flagged weight_decay=false (activation shape parameters) skip
/// the L2 term. Velocities are keyed by position, so the bound parameter
/// list must stay stable across steps.
class SgdMomentum {
public:
    SgdMomentum(double lr, double momentum, double l2,
                std::vector<ScheduleEntry> schedule = {})
        : lr_(lr), momentum_(momentum), l2_(l2), schedule_(std::move(schedule)) {
        check(lr > 0.0, ErrorKind::usage, "sgd: learning rate must be positive");
        check(momentum >= 0.0 && momentum < 1.0, ErrorKind::usage,
              "sgd: momentum must lie in [0,1)");
        check(l2 >= 0.0, ErrorKind::usage, "sgd: l2 must be non-negative");
        applied_.assign(schedule_.size(), false);
    }

    void bind(const std::vector<Param>& params) {
        velocity_.clear();
        for (const Param& p : params) velocity_.emplace_back(p.tensor->shape);
        bound_ = params.size();
    }

    /// Applies any schedule entries for this epoch. Each entry fires once.
    void begin_epoch(std::size_t epoch) {
        for (std::size_t i = 0; i < schedule_.size(); ++i)
            if (!applied_[i] && schedule_[i].epoch == epoch) {
                lr_ *= schedule_[i].multiplier;
                applied_[i] = true;
            }
    }

    void step(const std::vector<Param>& params) {
        check(params.size() == bound_, ErrorKind::usage,
              "sgd: parameter list changed since bind()");
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i].tensor;
            check(p.grad.size() == p.data.size(), ErrorKind::usage,
                  "sgd: parameter '" + params[i].name + "' has no gradient buffer");
            Tensor& v = velocity_[i];
            const double decay = params[i].weight_decay ? l2_ : 0.0;
            for (std::size_t j = 0; j < p.numel(); ++j) {
                const double g = p.grad[j] + decay * p.data[j];
                v.data[j] = momentum_ * v.data[j] - lr_ * g;
                p.data[j] += v.data[j];
            }
            p.zero_grad();
        }
    }

    double learning_rate() const { return lr_; }

private:
    double lr_, momentum_, l2_;
    std::vector<ScheduleEntry> schedule_;
    std::vector<bool> applied_;
    std::vector<Tensor> velocity_;
    std::size_t bound_ = 0;
};

} // namespace lpnet
