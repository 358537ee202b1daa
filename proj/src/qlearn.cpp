#include "deeprotor/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeprotor {

std::vector<double> dqn_targets(const std::vector<const Transition*>& batch, const QNetwork<float>& net,
                                double gamma) {
    if (batch.empty()) throw std::invalid_argument("dqn_targets: empty batch");
    std::vector<double> targets(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        const Transition& t = *batch[i];
        if (t.done) {
            targets[i] = t.reward;
            continue;
        }
        const std::vector<float> q = net.forward(std::span<const float>(t.next_obs));
        targets[i] = t.reward + gamma * static_cast<double>(*std::max_element(q.begin(), q.end()));
    }
    return targets;
}

std::pair<WhichNet, std::vector<double>> double_dqn_targets(const std::vector<const Transition*>& batch,
                                                            const QNetwork<float>& q1,
                                                            const QNetwork<float>& q2, double gamma,
                                                            bool coin) {
    if (batch.empty()) throw std::invalid_argument("double_dqn_targets: empty batch");
    if (!(q1.config() == q2.config()))
        throw std::invalid_argument("double_dqn_targets: networks must share an architecture");
    const QNetwork<float>& selector = coin ? q1 : q2;
    const QNetwork<float>& evaluator = coin ? q2 : q1;
    std::vector<double> targets(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        const Transition& t = *batch[i];
        if (t.done) {
            targets[i] = t.reward;
            continue;
        }
        const std::vector<float> qs = selector.forward(std::span<const float>(t.next_obs));
        const size_t best =
            static_cast<size_t>(std::max_element(qs.begin(), qs.end()) - qs.begin());
        const std::vector<float> qe = evaluator.forward(std::span<const float>(t.next_obs));
        targets[i] = t.reward + gamma * static_cast<double>(qe[best]);
    }
    return {coin ? WhichNet::Q1 : WhichNet::Q2, std::move(targets)};
}

double QTable::max_at(int s) const {
    double best = at(s, 0);
    for (int a = 1; a < n_actions; ++a) best = std::max(best, at(s, a));
    return best;
}

int QTable::argmax_at(int s) const {
    int best = 0;
    for (int a = 1; a < n_actions; ++a)
        if (at(s, a) > at(s, best)) best = a;
    return best;
}

double tabular_q_update(QTable& table, int s, int a, double r, int s_next, bool done,
                        const LearningParams& params) {
    const double bootstrap = done ? 0.0 : params.gamma * table.max_at(s_next);
    const double qe = r + bootstrap;
    double& entry = table.at(s, a);
    entry = entry + params.alpha * (qe - entry);
    return entry;
}

QTable value_iteration(const ExplicitMdp& mdp, double gamma, double tolerance) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("value_iteration: gamma in [0,1)");
    if (!(tolerance > 0.0)) throw std::invalid_argument("value_iteration: tolerance must be > 0");
    QTable q(mdp.n_states, mdp.n_actions);
    QTable next(mdp.n_states, mdp.n_actions);
    while (true) {
        double delta = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            for (int a = 0; a < mdp.n_actions; ++a) {
                const int s2 = mdp.next_at(s, a);
                double value = mdp.reward_at(s, a);
                if (!mdp.terminal[s2]) value += gamma * q.max_at(s2);
                delta = std::max(delta, std::abs(value - q.at(s, a)));
                next.at(s, a) = value;
            }
        }
        q.q.swap(next.q);
        if (delta < tolerance) break;
    }
    return q;
}

ExplicitMdp GridWorld::to_mdp() const {
    ExplicitMdp mdp;
    mdp.n_states = width * height;
    mdp.n_actions = 4;
    mdp.next.resize(static_cast<size_t>(mdp.n_states) * 4);
    mdp.reward.assign(static_cast<size_t>(mdp.n_states) * 4, 0.0);
    mdp.terminal.assign(static_cast<size_t>(mdp.n_states), false);
    mdp.terminal[goal_cell] = true;

    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int s = cell(x, y);
            for (int a = 0; a < 4; ++a) {
                int nx = x + dx[a], ny = y + dy[a];
                int s2 = s;
                if (nx >= 0 && nx < width && ny >= 0 && ny < height && !blocked[cell(nx, ny)])
                    s2 = cell(nx, ny);
                mdp.next[static_cast<size_t>(s) * 4 + a] = s2;
                if (s2 == goal_cell && s != goal_cell)
                    mdp.reward[static_cast<size_t>(s) * 4 + a] = 1.0;
            }
        }
    }
    return mdp;
}

}  // namespace deeprotor
