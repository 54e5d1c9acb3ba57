#pragma once

#include <random>
#include <vector>

#include "lvs/env.hpp"

namespace lvs::nn {

// Fixed-capacity FIFO of transitions with uniform sampling (with replacement).
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return buffer_[i]; }

    /// Indices of `batch` uniformly drawn slots.
    std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> buffer_;
};

}  // namespace lvs::nn
