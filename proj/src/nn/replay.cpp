#include "lvs/nn/replay.hpp"

namespace lvs::nn {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw Error("ReplayMemory: capacity must be positive");
    }
    buffer_.reserve(capacity);
}

void ReplayMemory::push(Transition t) {
    if (buffer_.size() < capacity_) {
        buffer_.push_back(std::move(t));
    } else {
        buffer_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch, std::mt19937_64& rng) const {
    if (buffer_.empty()) {
        throw Error("ReplayMemory: sampling from an empty buffer");
    }
    std::uniform_int_distribution<std::size_t> pick(0, buffer_.size() - 1);
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = pick(rng);
    return idx;
}

}  // namespace lvs::nn
