#include "deeprotor/replay.hpp"

#include <stdexcept>

namespace deeprotor {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay: capacity must be > 0");
    storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (size_ < capacity_) {
        storage_.push_back(std::move(t));
        ++size_;
        head_ = size_ % capacity_;
    } else {
        storage_[head_] = std::move(t);  // overwrite the oldest
        head_ = (head_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayBuffer::sample(size_t n, Rng& rng) const {
    if (size_ < n) throw std::invalid_argument("replay: sample larger than buffer size");
    std::vector<const Transition*> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(&storage_[static_cast<size_t>(rng.next_int(static_cast<int>(size_)))]);
    return out;
}

void ReplayBuffer::restore(std::vector<Transition> storage, size_t head, size_t size) {
    if (storage.size() > capacity_ || size != storage.size() || head >= std::max<size_t>(capacity_, 1))
        throw std::invalid_argument("replay: restore state inconsistent with capacity");
    storage_ = std::move(storage);
    head_ = head;
    size_ = size;
}

double epsilon_at(const EpsilonSchedule& schedule, long global_step) {
    if (global_step < 0) throw std::invalid_argument("epsilon_at: step must be >= 0");
    if (schedule.decay_steps <= 0 || global_step >= schedule.decay_steps) return schedule.eps_end;
    const double f = static_cast<double>(global_step) / static_cast<double>(schedule.decay_steps);
    return schedule.eps_start + (schedule.eps_end - schedule.eps_start) * f;
}

int select_action(const std::vector<float>& qvalues, double epsilon, Rng& rng) {
    if (qvalues.empty()) throw std::invalid_argument("select_action: empty value vector");
    const int n = static_cast<int>(qvalues.size());
    if (rng.next_double() < epsilon) return rng.next_int(n);
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (qvalues[i] > qvalues[best]) best = i;
    return best;
}

}  // namespace deeprotor
