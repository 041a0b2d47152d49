#pragma once

#include <deque>
#include <stdexcept>
#include <string>

#include "coachsim/actions.hpp"

namespace coachsim::agent {

/// One decision step: the situation and reasoning narrative plus the
/// chosen atomic action.
struct MemoryUnit {
    long tick = 0;
    std::string situation;
    std::string reasoning;
    AtomicAction action = AtomicAction::Maintain;
};

/// Fixed-capacity FIFO of the most recent memory units.
class ShortTermMemory {
public:
    explicit ShortTermMemory(int capacity = 5) : capacity_(capacity) {
        if (capacity_ <= 0) throw std::invalid_argument("memory capacity must be > 0");
    }

    void push(const MemoryUnit& unit) {
        units_.push_back(unit);
        if (static_cast<int>(units_.size()) > capacity_) units_.pop_front();
    }

    int capacity() const { return capacity_; }
    std::size_t size() const { return units_.size(); }
    bool empty() const { return units_.empty(); }
    const std::deque<MemoryUnit>& units() const { return units_; }
    const MemoryUnit& newest() const { return units_.back(); }

private:
    int capacity_;
    std::deque<MemoryUnit> units_;
};

inline ShortTermMemory push_memory(ShortTermMemory memory, const MemoryUnit& unit) {
    memory.push(unit);
    return memory;
}

}  // namespace coachsim::agent
