#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "deeprotor/checkpoint.hpp"
#include "deeprotor/network.hpp"
#include "deeprotor/rng.hpp"

using namespace deeprotor;

namespace {

std::vector<float> random_obs(int h, int w, uint64_t seed) {
    Rng rng(seed);
    std::vector<float> obs(static_cast<size_t>(h) * w);
    for (float& v : obs) v = static_cast<float>(rng.next_double());
    return obs;
}

NetConfig tiny_config() {
    NetConfig cfg;
    cfg.input_height = 8;
    cfg.input_width = 8;
    cfg.convs = {{4, 3, 1}, {4, 3, 2}};
    cfg.hidden = {};
    cfg.outputs = 3;
    return cfg;
}

}  // namespace

TEST_CASE("forward of an all-zero network is the output bias") {
    const NetConfig cfg = tiny_config();
    QNetwork<float> net(cfg);
    const std::vector<float> obs = random_obs(8, 8, 1);
    const std::vector<float> q = net.forward(std::span<const float>(obs));
    REQUIRE(q.size() == 3);
    for (float v : q) CHECK(v == 0.0f);
}

TEST_CASE("default architecture chains 84x84 to 5 outputs") {
    NetConfig cfg;  // 4 convs + dense 256, as configured by default
    cfg.outputs = 5;
    QNetwork<float> net = QNetwork<float>::he_init(cfg, 7);
    const auto& dims = net.conv_dims();
    REQUIRE(dims.size() == 5);
    CHECK(dims[1].h == 20);  // (84-8)/4+1
    CHECK(dims[2].h == 9);   // (20-4)/2+1
    CHECK(dims[3].h == 7);   // (9-3)/1+1
    CHECK(dims[4].h == 5);   // (7-3)/1+1
    CHECK(dims[4].count() == 5 * 5 * 32);
    const std::vector<float> obs = random_obs(84, 84, 2);
    CHECK(net.forward(std::span<const float>(obs)).size() == 5);
}

TEST_CASE("conv output dims follow floor((n-k)/s)+1 for every layer") {
    Rng rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        NetConfig cfg;
        cfg.input_height = 10 + rng.next_int(30);
        cfg.input_width = 10 + rng.next_int(30);
        cfg.convs = {{1 + rng.next_int(8), 2 + rng.next_int(4), 1 + rng.next_int(3)},
                     {1 + rng.next_int(8), 2 + rng.next_int(3), 1 + rng.next_int(2)}};
        cfg.hidden = {8};
        cfg.outputs = 4;
        int h = cfg.input_height, w = cfg.input_width;
        bool feasible = true;
        for (const ConvSpec& c : cfg.convs) {
            if (h < c.kernel || w < c.kernel) feasible = false;
            h = (h - c.kernel) / c.stride + 1;
            w = (w - c.kernel) / c.stride + 1;
        }
        if (!feasible) {
            CHECK_THROWS_AS((void)QNetwork<float>(cfg), std::invalid_argument);
            continue;
        }
        QNetwork<float> net(cfg);
        CHECK(net.conv_dims().back().h == h);
        CHECK(net.conv_dims().back().w == w);
    }
}

TEST_CASE("initialization and forward are deterministic") {
    NetConfig cfg = tiny_config();
    const QNetwork<float> a = QNetwork<float>::he_init(cfg, 99);
    const QNetwork<float> b = QNetwork<float>::he_init(cfg, 99);
    CHECK(a.params() == b.params());
    const QNetwork<float> c = QNetwork<float>::he_init(cfg, 100);
    CHECK(a.params() != c.params());

    const std::vector<float> obs = random_obs(8, 8, 3);
    CHECK(a.forward(std::span<const float>(obs)) == a.forward(std::span<const float>(obs)));
// biases start at zero
    for (const TensorInfo& t : a.tensors())
        if (t.name.ends_with(".b"))
            for (size_t i = 0; i < t.count; ++i) CHECK(a.params()[t.offset + i] == 0.0f);
}

TEST_CASE("huber value and gradient") {
    CHECK(huber(0.5, 1.0) == doctest::Approx(0.125));
    CHECK(huber(3.0, 1.0) == doctest::Approx(2.5));
    CHECK(huber_grad(0.5, 1.0) == 0.5);
    CHECK(huber_grad(3.0, 1.0) == 1.0);
    CHECK(huber_grad(-3.0, 1.0) == -1.0);
    // derivative check by central differences, away from the kink
    for (double r : {-2.5, -0.7, 0.0, 0.4, 1.7}) {
        const double h = 1e-6;
        const double numeric = (huber(r + h, 1.0) - huber(r - h, 1.0)) / (2 * h);
        CHECK(huber_grad(r, 1.0) == doctest::Approx(numeric).epsilon(1e-6));
    }
}

TEST_CASE("train_step with target == prediction changes nothing") {
    NetConfig cfg = tiny_config();
    QNetwork<float> net = QNetwork<float>::he_init(cfg, 5);
    AdamState<float> opt(net.param_count());
    const std::vector<float> obs = random_obs(8, 8, 4);
    const std::vector<float> q = net.forward(std::span<const float>(obs));
    const std::vector<float> before = net.params();
    const double loss = train_step(net, opt, {obs.data()}, {1}, {static_cast<double>(q[1])}, LossSpec{});
    CHECK(loss == 0.0);
    CHECK(net.params() == before);  // zero gradient, zero Adam moments
}

TEST_CASE("train_step descends on a fixed batch") {
    NetConfig cfg = tiny_config();
    cfg.hidden = {16};
    QNetwork<float> net = QNetwork<float>::he_init(cfg, 6);
    AdamState<float> opt(net.param_count());
    opt.step_size = 1e-3;
    std::vector<std::vector<float>> obs;
    std::vector<const float*> ptrs;
    std::vector<int> actions;
    std::vector<double> targets;
    for (int i = 0; i < 8; ++i) {
        obs.push_back(random_obs(8, 8, 100 + i));
        actions.push_back(i % 3);
        targets.push_back(i % 2 == 0 ? 1.0 : -1.0);
    }
    for (const auto& o : obs) ptrs.push_back(o.data());
    double prev = train_step(net, opt, ptrs, actions, targets, LossSpec{});
    for (int it = 0; it < 9; ++it) {
        const double loss = train_step(net, opt, ptrs, actions, targets, LossSpec{});
        CHECK(loss < prev);
        prev = loss;
    }
}

TEST_CASE("train_step validates inputs") {
    QNetwork<float> net = QNetwork<float>::he_init(tiny_config(), 5);
    AdamState<float> opt(net.param_count());
    const std::vector<float> obs = random_obs(8, 8, 4);
    CHECK_THROWS_AS(train_step(net, opt, {}, {}, {}, LossSpec{}), std::invalid_argument);
    CHECK_THROWS_AS(train_step(net, opt, {obs.data()}, {0}, {std::nan("")}, LossSpec{}),
                    std::runtime_error);
    CHECK_THROWS_AS(train_step(net, opt, {obs.data()}, {7}, {0.0}, LossSpec{}), std::invalid_argument);
}

TEST_CASE("gradient check on a small conv network") {
    NetConfig cfg = tiny_config();  // 2 conv + output dense, 8x8 input
    const QNetwork<double> net = to_double(QNetwork<float>::he_init(cfg, 11));
    const std::vector<float> obs = random_obs(8, 8, 12);
    const double err = gradient_check(net, obs, 1, 1e-5, 77, 200);
    CHECK(err <= 1e-4);
}

TEST_CASE("gradient check on a linear single-layer network is near exact") {
    NetConfig cfg;
    cfg.input_height = 6;
    cfg.input_width = 6;
    cfg.convs = {};
    cfg.hidden = {};
    cfg.outputs = 4;
    const QNetwork<double> net = to_double(QNetwork<float>::he_init(cfg, 21));
    const std::vector<float> obs = random_obs(6, 6, 22);
    CHECK(gradient_check(net, obs, 2, 1e-5, 78, 200) <= 1e-7);
}

TEST_CASE("zero input and zero parameters leave only the bias path") {
    NetConfig cfg;
    cfg.input_height = 4;
    cfg.input_width = 4;
    cfg.convs = {};
    cfg.hidden = {};
    cfg.outputs = 2;
    QNetwork<double> net(cfg);  // all zeros
    const std::vector<float> obs(16, 0.0f);
    QNetwork<double>::Workspace ws;
    net.forward_cached(std::span<const float>(obs), ws);
    std::vector<double> dout{1.0, 0.0};
    std::vector<double> grad(net.param_count(), 0.0);
    net.backward(ws, dout, grad);
    for (const TensorInfo& t : net.tensors()) {
        for (size_t i = 0; i < t.count; ++i) {
            const double g = grad[t.offset + i];
            if (t.name == "out.b")
                CHECK(g == (i == 0 ? 1.0 : 0.0));
            else
                CHECK(g == 0.0);  // weight path dead with zero input
        }
    }
    CHECK(gradient_check(net, obs, 0, 1e-4) <= 1e-7);
}

TEST_CASE("checkpoint round-trip is bit exact") {
    NetConfig cfg = tiny_config();
    QNetwork<float> net = QNetwork<float>::he_init(cfg, 31);
    AdamState<float> opt(net.param_count());
    opt.step_size = 2.5e-4;
    // take a couple of real steps so moments are non-trivial
    const std::vector<float> obs = random_obs(8, 8, 32);
    train_step(net, opt, {obs.data()}, {0}, {0.7}, LossSpec{});
    train_step(net, opt, {obs.data()}, {2}, {-0.3}, LossSpec{});

    const std::string bytes = save_checkpoint(net, opt, "episode 42\nnote hello\n");
    const LoadedCheckpoint loaded = load_checkpoint(bytes);
    CHECK(loaded.net.config() == cfg);
    CHECK(loaded.net.params() == net.params());
    CHECK(loaded.opt.m == opt.m);
    CHECK(loaded.opt.v == opt.v);
    CHECK(loaded.opt.step == opt.step);
    CHECK(loaded.opt.step_size == opt.step_size);
    CHECK(loaded.metadata == "episode 42\nnote hello\n");
}

TEST_CASE("checkpoint rejects bad magic and truncation") {
    QNetwork<float> net = QNetwork<float>::he_init(tiny_config(), 31);
    AdamState<float> opt(net.param_count());
    std::string bytes = save_checkpoint(net, opt, "");
    std::string corrupted = bytes;
    corrupted[0] = 'X';
    CHECK_THROWS_WITH_AS(load_checkpoint(corrupted), doctest::Contains("magic"), std::runtime_error);
    CHECK_THROWS_WITH_AS(load_checkpoint(bytes.substr(0, bytes.size() / 2)),
                         doctest::Contains("truncated"), std::runtime_error);
}

TEST_CASE("checkpoint rejects a shape mismatch against the wrong config") {
    QNetwork<float> net = QNetwork<float>::he_init(tiny_config(), 31);
    AdamState<float> opt(net.param_count());
    const CheckpointData data = parse_checkpoint(save_checkpoint(net, opt, ""));
    NetConfig other = tiny_config();
    other.convs[0].out_channels = 8;
    QNetwork<float> wrong(other);
    AdamState<float> wrong_opt(wrong.param_count());
    CHECK_THROWS_WITH_AS(read_network_records(data, "net.", wrong, wrong_opt),
                         doctest::Contains("shape mismatch"), std::runtime_error);
}

TEST_CASE("resume from checkpoint continues training identically") {
    NetConfig cfg = tiny_config();
    const std::vector<float> obs1 = random_obs(8, 8, 41);
    const std::vector<float> obs2 = random_obs(8, 8, 42);

    auto step_twice = [&](QNetwork<float>& net, AdamState<float>& opt) {
        train_step(net, opt, {obs1.data()}, {0}, {0.4}, LossSpec{});
        train_step(net, opt, {obs2.data()}, {1}, {-0.9}, LossSpec{});
    };

    // Uninterrupted: four steps.
    QNetwork<float> full = QNetwork<float>::he_init(cfg, 51);
    AdamState<float> full_opt(full.param_count());
    step_twice(full, full_opt);
    step_twice(full, full_opt);

    // Interrupted at the halfway checkpoint.
    QNetwork<float> half = QNetwork<float>::he_init(cfg, 51);
    AdamState<float> half_opt(half.param_count());
    step_twice(half, half_opt);
    LoadedCheckpoint resumed = load_checkpoint(save_checkpoint(half, half_opt, ""));
    step_twice(resumed.net, resumed.opt);

    CHECK(resumed.net.params() == full.params());
    CHECK(resumed.opt.m == full_opt.m);
    CHECK(resumed.opt.v == full_opt.v);
}
