#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deeprotor/camera.hpp"
#include "deeprotor/rng.hpp"

namespace deeprotor {

struct ConvSpec {
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    bool operator==(const ConvSpec&) const = default;
};

// Convolution stack followed by dense layers; ReLU between all hidden
// layers, linear output of one Q value per action.
struct NetConfig {
    int input_height = 84;
    int input_width = 84;
    std::vector<ConvSpec> convs = {{16, 8, 4}, {32, 4, 2}, {32, 3, 1}, {32, 3, 1}};
    std::vector<int> hidden = {256};
    int outputs = 5;
    bool operator==(const NetConfig&) const = default;
};

struct TensorInfo {
    std::string name;
    size_t offset = 0;
    size_t count = 0;
    std::vector<int> dims;
};

struct LossSpec {
    double delta = 1.0;  // Huber transition point
};

inline double huber(double r, double delta) {
    const double a = std::abs(r);
    return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

inline double huber_grad(double r, double delta) {
    if (r > delta) return delta;
    if (r < -delta) return -delta;
    return r;
}

template <typename T>
class QNetwork {
  public:
    // All-zero parameters.
    explicit QNetwork(const NetConfig& cfg);

    // He-uniform weights, zero biases, deterministic in seed.
    static QNetwork he_init(const NetConfig& cfg, uint64_t seed);

    const NetConfig& config() const { return cfg_; }
    size_t param_count() const { return params_.size(); }
    std::vector<T>& params() { return params_; }
    const std::vector<T>& params() const { return params_; }
    const std::vector<TensorInfo>& tensors() const { return tensors_; }

    // (height, width, channels) of the activation entering conv layer i;
    // index convs.size() is the final conv output (the flatten input).
    struct Dims {
        int h = 0, w = 0, c = 0;
        int count() const { return h * w * c; }
    };
    const std::vector<Dims>& conv_dims() const { return conv_dims_; }

    std::vector<T> forward(const ObservationTensor& obs) const;
    std::vector<T> forward(std::span<const float> obs) const;

    // Training path: keeps every layer input and pre-activation so backward
    // can run without re-deriving them.
    struct Workspace {
        std::vector<std::vector<T>> act;     // act[0] = input, act[i+1] = layer i output (post ReLU)
        std::vector<std::vector<T>> preact;  // pre-ReLU values, empty for the linear output
    };
    std::vector<T> forward_cached(std::span<const float> obs, Workspace& ws) const;

    // Accumulates d(loss)/d(param) into grad (same length as params) given
    // d(loss)/d(output).
    void backward(const Workspace& ws, std::span<const T> dout, std::vector<T>& grad) const;

  private:
    NetConfig cfg_;
    std::vector<T> params_;
    std::vector<TensorInfo> tensors_;
    std::vector<Dims> conv_dims_;
    std::vector<int> dense_in_;  // input width of each dense layer
};

// Adam with bias correction.  Moment arrays are congruent to the parameter
// vector.
template <typename T>
struct AdamState {
    double step_size = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon_hat = 1e-8;
    long step = 0;
    std::vector<T> m, v;

    explicit AdamState(size_t n = 0) : m(n, T(0)), v(n, T(0)) {}
    void apply(std::vector<T>& params, const std::vector<T>& grad);
};

// One optimizer update from a batch of (observation, taken action, target).
// Huber loss on the taken-action output only, mean reduction.  Returns the
// pre-update mean loss; throws on non-finite loss or gradient.
template <typename T>
double train_step(QNetwork<T>& net, AdamState<T>& opt, const std::vector<const float*>& obs_batch,
                  const std::vector<int>& actions, const std::vector<double>& targets,
                  const LossSpec& loss);

// Central-difference check of backward() on >= min_coords randomly chosen
// parameter coordinates of f(p) = forward(obs)[action].  64-bit only.
double gradient_check(const QNetwork<double>& net, const std::vector<float>& obs, int action_index,
                      double perturbation, uint64_t seed = 1234, int min_coords = 200);

QNetwork<double> to_double(const QNetwork<float>& net);

extern template class QNetwork<float>;
extern template class QNetwork<double>;
extern template struct AdamState<float>;
extern template struct AdamState<double>;
extern template double train_step<float>(QNetwork<float>&, AdamState<float>&,
                                          const std::vector<const float*>&, const std::vector<int>&,
                                          const std::vector<double>&, const LossSpec&);
extern template double train_step<double>(QNetwork<double>&, AdamState<double>&,
                                           const std::vector<const float*>&, const std::vector<int>&,
                                           const std::vector<double>&, const LossSpec&);

}  // namespace deeprotor
