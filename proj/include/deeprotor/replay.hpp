#pragma once

#include <vector>

#include "deeprotor/rng.hpp"

namespace deeprotor {

// One experience tuple.  Observations are stored flat; all transitions in a
// buffer share one observation length.
struct Transition {
    std::vector<float> obs;
    int action = 0;
    float reward = 0.0f;
    std::vector<float> next_obs;
    bool done = false;
};

// Fixed-capacity ring with strictly FIFO eviction.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(size_t capacity);

    void push(Transition t);
    // n uniform draws with replacement; deterministic in rng.  Throws when
    // size() < n.
    std::vector<const Transition*> sample(size_t n, Rng& rng) const;

    size_t size() const { return size_; }
    size_t capacity() const { return capacity_; }
    const Transition& at(size_t i) const { return storage_[i]; }  // ring order
    size_t head() const { return head_; }

    // Checkpoint restore: raw ring contents plus the write cursor.
    void restore(std::vector<Transition> storage, size_t head, size_t size);

  private:
    size_t capacity_;
    std::vector<Transition> storage_;
    size_t head_ = 0;  // next write position
    size_t size_ = 0;
};

// Linear eps_start -> eps_end over decay_steps, constant afterward.
struct EpsilonSchedule {
    double eps_start = 1.0;
    double eps_end = 0.05;
    long decay_steps = 30000;
};

double epsilon_at(const EpsilonSchedule& schedule, long global_step);

// Epsilon-greedy with lowest-index tie-break on the greedy path.
int select_action(const std::vector<float>& qvalues, double epsilon, Rng& rng);

}  // namespace deeprotor
