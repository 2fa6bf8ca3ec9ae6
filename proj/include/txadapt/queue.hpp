#pragma once

#include <cstdint>
#include <vector>

#include "txadapt/rng.hpp"

namespace txadapt {

// FIFO transmit queue with a sliding delay bound: the backlog may never
// exceed the bits that arrived over the last d_max slots (current slot
// included), otherwise the slot counts as a delay violation and the excess
// is dropped. All bit quantities are exact integers.
class DelayQueue {
public:
    explicit DelayQueue(int d_max);

    struct SlotOutcome {
        std::int64_t served_bits = 0;
        std::int64_t queue_tmp = 0;    // backlog after arrival and service, before drop
        std::int64_t queue_after = 0;  // backlog carried to the next slot
        std::int64_t threshold = 0;    // arrivals over the last d_max slots
        bool violation = false;
    };

    // Advances one slot with the given arrival and served bits.
    SlotOutcome step(std::int64_t arrival_bits, std::int64_t served_bits);

    // Clears backlog, the arrival window, and the violation counters.
    void reset();

    std::int64_t backlog() const { return backlog_; }
    std::int64_t violations() const { return violations_; }
    std::int64_t slots() const { return slots_; }

    // Fraction of elapsed slots that violated the delay bound.
    // Throws UndefinedStatisticError when no slot has elapsed.
    double empirical_dvp() const;

private:
    int d_max_;
    std::int64_t backlog_ = 0;
    std::vector<std::int64_t> window_;  // last d_max arrivals, ring buffer
    std::int64_t window_sum_ = 0;
    int window_pos_ = 0;
    std::int64_t violations_ = 0;
    std::int64_t slots_ = 0;
};

// Poisson packet arrivals, in bits, with the given mean per slot.
std::int64_t draw_arrival(Rng& rng, double mean_bits);

}  // namespace txadapt
