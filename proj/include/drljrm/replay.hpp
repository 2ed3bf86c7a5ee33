#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "drljrm/rng.hpp"

namespace drljrm {

// Ring buffer with uniform without-replacement sampling. T must be cheap to
// hold by value; sample() hands out stable pointers into the ring.
template <typename T>
class Ring {
  public:
    explicit Ring(size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay: capacity must be positive");
        items_.reserve(capacity);
    }

    void store(T item) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
        } else {
            items_[head_] = std::move(item);
            head_ = (head_ + 1) % capacity_;
        }
        ++inserted_;
    }

    size_t size() const { return items_.size(); }
    size_t capacity() const { return capacity_; }
    bool full() const { return items_.size() == capacity_; }
    size_t inserted() const { return inserted_; }
    const T& at(size_t i) const { return items_[i]; }
    void clear() {
        items_.clear();
        head_ = 0;
        inserted_ = 0;
    }

    std::vector<const T*> sample(size_t batch, Rng& rng) const {
        if (batch > items_.size()) throw std::invalid_argument("replay: sample larger than buffer");
        std::vector<size_t> idx(items_.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::vector<const T*> out;
        out.reserve(batch);
        for (size_t t = 0; t < batch; ++t) {
            const size_t j = t + static_cast<size_t>(rng.below(idx.size() - t));
            std::swap(idx[t], idx[j]);
            out.push_back(&items_[idx[t]]);
        }
        return out;
    }

    std::vector<const T*> sample(size_t batch, uint64_t seed) const {
        Rng rng(seed);
        return sample(batch, rng);
    }

  private:
    size_t capacity_;
    std::vector<T> items_;
    size_t head_ = 0;
    size_t inserted_ = 0;
};

// One SA replay record; state/action are the network-facing vectors.
struct Transition {
    std::vector<double> state;
    std::vector<double> action;  // pre-discretization actor output (with noise)
    double reward = 0.0;
    std::vector<double> next_state;
};

using ReplayBuffer = Ring<Transition>;

// One synchronized PA record across all agents.
struct JointTransition {
    std::vector<std::vector<double>> self_states;       // per agent
    std::vector<std::vector<double>> actions;           // per agent, raw in [-1,1]
    std::vector<double> rewards;                        // per agent
    std::vector<std::vector<double>> next_self_states;  // per agent
};

using JointReplayBuffer = Ring<JointTransition>;

}  // namespace drljrm
