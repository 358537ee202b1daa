#pragma once

#include <utility>
#include <vector>

#include "deeprotor/network.hpp"
#include "deeprotor/replay.hpp"

namespace deeprotor {

// Bootstrap targets from the single online network:
// done ? r : r + gamma * max_a Q(s', a).
std::vector<double> dqn_targets(const std::vector<const Transition*>& batch, const QNetwork<float>& net,
                                double gamma);

enum class WhichNet { Q1, Q2 };

// Double estimator: the coin picks the updated network; the updated network
// chooses the argmax action at s' and the other one evaluates it.
std::pair<WhichNet, std::vector<double>> double_dqn_targets(const std::vector<const Transition*>& batch,
                                                            const QNetwork<float>& q1,
                                                            const QNetwork<float>& q2, double gamma,
                                                            bool coin);

// ---------------------------------------------------------------------------
// Tabular reference machinery
// ---------------------------------------------------------------------------

struct LearningParams {
    double alpha = 0.1;
    double gamma = 0.99;
    int batch_size = 32;
    int train_every = 4;
    int warmup = 1000;
};

// Dense (state, action) -> value map.
struct QTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> q;

    QTable(int states, int actions) : n_states(states), n_actions(actions),
                                      q(static_cast<size_t>(states) * actions, 0.0) {}
    double& at(int s, int a) { return q[static_cast<size_t>(s) * n_actions + a]; }
    double at(int s, int a) const { return q[static_cast<size_t>(s) * n_actions + a]; }
    double max_at(int s) const;
    int argmax_at(int s) const;
};

// Temporal-difference update:
//   Qe = r + gamma * max_a' Q(s', a')   (zero bootstrap when done)
//   Q(s,a) <- Q(s,a) + alpha * (Qe - Q(s,a))
// Returns the updated entry.
double tabular_q_update(QTable& table, int s, int a, double r, int s_next, bool done,
                        const LearningParams& params);

// Explicit finite deterministic MDP: tables of successor, reward and
// terminal flags.
struct ExplicitMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<int> next;        // [s * n_actions + a]
    std::vector<double> reward;   // [s * n_actions + a]
    std::vector<bool> terminal;   // [s]; absorbing, no bootstrap out of them

    int next_at(int s, int a) const { return next[static_cast<size_t>(s) * n_actions + a]; }
    double reward_at(int s, int a) const { return reward[static_cast<size_t>(s) * n_actions + a]; }
};

// Bellman optimality iteration to sup-norm tolerance; the convergence oracle
// for the sampled learners.
QTable value_iteration(const ExplicitMdp& mdp, double gamma, double tolerance);

// Four-connected gridworld over a boolean obstacle mask: actions are
// +x, -x, +y, -y; blocked or out-of-bounds moves stay in place; entering the
// goal cell pays +1 and terminates.
struct GridWorld {
    int width = 0;
    int height = 0;
    std::vector<bool> blocked;  // row-major [y * width + x]
    int start_cell = 0;
    int goal_cell = 0;

    int cell(int x, int y) const { return y * width + x; }
    ExplicitMdp to_mdp() const;
};

}  // namespace deeprotor
