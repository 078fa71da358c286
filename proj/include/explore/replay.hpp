#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "explore/rng.hpp"

namespace explore {

struct Transition {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

struct ContinuousTransition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

// Bounded FIFO store. Once full, each push overwrites the oldest entry.
// Sampling is uniform with replacement.
template <class T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity)
    {
        if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
        items_.reserve(capacity < 4096 ? capacity : 4096);
    }

    void push(T item)
    {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
        } else {
            items_[head_] = std::move(item);
            head_ = (head_ + 1) % capacity_;
        }
        ++pushed_;
    }

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t total_pushed() const { return pushed_; }
    bool empty() const { return items_.empty(); }

    // i = 0 is the oldest stored item
    const T& at(std::size_t i) const
    {
        if (i >= items_.size()) throw std::out_of_range("replay index out of range");
        return items_[(head_ + i) % items_.size()];
    }

    std::vector<T> sample(std::size_t n, Rng& rng) const
    {
        if (items_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
        std::vector<T> out;
        out.reserve(n);
        for (std::size_t k = 0; k < n; ++k) out.push_back(items_[rng.index(items_.size())]);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::size_t pushed_ = 0;
    std::vector<T> items_;
};

}  // namespace explore
