#include "txadapt/queue.hpp"

#include <algorithm>

#include "txadapt/errors.hpp"

namespace txadapt {

DelayQueue::DelayQueue(int d_max) : d_max_(d_max) {
    if (d_max < 1) throw ConfigError("d_max must be >= 1");
    window_.assign(static_cast<std::size_t>(d_max), 0);
}

DelayQueue::SlotOutcome DelayQueue::step(std::int64_t arrival_bits, std::int64_t served_bits) {
    if (arrival_bits < 0 || served_bits < 0)
        throw ConfigError("arrival and served bits must be non-negative");
    SlotOutcome out;
    out.served_bits = served_bits;
    out.queue_tmp = std::max<std::int64_t>(backlog_ + arrival_bits - served_bits, 0);

    window_sum_ += arrival_bits - window_[window_pos_];
    window_[window_pos_] = arrival_bits;
    window_pos_ = (window_pos_ + 1) % d_max_;
    out.threshold = window_sum_;

    out.violation = out.queue_tmp > out.threshold;
    out.queue_after = std::min(out.queue_tmp, out.threshold);
    backlog_ = out.queue_after;
    violations_ += out.violation ? 1 : 0;
    ++slots_;
    return out;
}

void DelayQueue::reset() {
    backlog_ = 0;
    std::fill(window_.begin(), window_.end(), 0);
    window_sum_ = 0;
    window_pos_ = 0;
    violations_ = 0;
    slots_ = 0;
}

double DelayQueue::empirical_dvp() const {
    if (slots_ == 0) throw UndefinedStatisticError("DVP undefined over zero slots");
    return static_cast<double>(violations_) / static_cast<double>(slots_);
}

std::int64_t draw_arrival(Rng& rng, double mean_bits) {
    if (mean_bits < 0.0) throw ConfigError("arrival mean must be non-negative");
    if (mean_bits == 0.0) return 0;
    return rng.poisson(mean_bits);
}

}  // namespace txadapt
