#include "deeprotor/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace deeprotor {

namespace {

void validate_config(const NetConfig& cfg) {
    if (cfg.input_height < 1 || cfg.input_width < 1)
        throw std::invalid_argument("network: input shape must be positive");
    if (cfg.outputs < 1) throw std::invalid_argument("network: need at least one output");
    for (const ConvSpec& c : cfg.convs)
        if (c.out_channels < 1 || c.kernel < 1 || c.stride < 1)
            throw std::invalid_argument("network: invalid conv spec");
    for (int h : cfg.hidden)
        if (h < 1) throw std::invalid_argument("network: invalid hidden size");
}

int conv_out(int n, int k, int s) { return (n - k) / s + 1; }

}  // namespace

template <typename T>
QNetwork<T>::QNetwork(const NetConfig& cfg) : cfg_(cfg) {
    validate_config(cfg);
    Dims d{cfg.input_height, cfg.input_width, 1};
    conv_dims_.push_back(d);
    size_t offset = 0;
    auto add_tensor = [&](const std::string& name, std::vector<int> dims) {
        size_t count = 1;
        for (int x : dims) count *= static_cast<size_t>(x);
        tensors_.push_back({name, offset, count, std::move(dims)});
        offset += count;
    };
    for (size_t i = 0; i < cfg.convs.size(); ++i) {
        const ConvSpec& c = cfg.convs[i];
        if (d.h < c.kernel || d.w < c.kernel)
            throw std::invalid_argument("network: conv kernel larger than its input");
        add_tensor("conv" + std::to_string(i) + ".w", {c.out_channels, d.c, c.kernel, c.kernel});
        add_tensor("conv" + std::to_string(i) + ".b", {c.out_channels});
        d = {conv_out(d.h, c.kernel, c.stride), conv_out(d.w, c.kernel, c.stride), c.out_channels};
        conv_dims_.push_back(d);
    }
    int in = d.count();
    for (size_t i = 0; i < cfg.hidden.size(); ++i) {
        dense_in_.push_back(in);
        add_tensor("dense" + std::to_string(i) + ".w", {cfg.hidden[i], in});
        add_tensor("dense" + std::to_string(i) + ".b", {cfg.hidden[i]});
        in = cfg.hidden[i];
    }
    dense_in_.push_back(in);
    add_tensor("out.w", {cfg.outputs, in});
    add_tensor("out.b", {cfg.outputs});
    params_.assign(offset, T(0));
}

template <typename T>
QNetwork<T> QNetwork<T>::he_init(const NetConfig& cfg, uint64_t seed) {
    QNetwork net(cfg);
    Rng rng(seed);
    for (const TensorInfo& t : net.tensors_) {
        if (t.name.ends_with(".b")) continue;  // biases stay zero
        size_t fan_in = 1;
        for (size_t i = 1; i < t.dims.size(); ++i) fan_in *= static_cast<size_t>(t.dims[i]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (size_t i = 0; i < t.count; ++i)
            net.params_[t.offset + i] = static_cast<T>(rng.uniform(-limit, limit));
    }
    return net;
}

namespace {

template <typename T>
void conv_forward(const T* in, int ih, int iw, int ic, const T* w, const T* b, int oc, int k, int s,
                  T* out, int oh, int ow) {
    for (int o = 0; o < oc; ++o) {
        const T bias = b[o];
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                T acc = bias;
                for (int c = 0; c < ic; ++c) {
                    const T* wrow = w + ((static_cast<size_t>(o) * ic + c) * k) * k;
                    const T* irow = in + (static_cast<size_t>(c) * ih + oy * s) * iw + ox * s;
                    for (int ky = 0; ky < k; ++ky) {
                        const T* wp = wrow + static_cast<size_t>(ky) * k;
                        const T* ip = irow + static_cast<size_t>(ky) * iw;
                        for (int kx = 0; kx < k; ++kx) acc += wp[kx] * ip[kx];
                    }
                }
                out[(static_cast<size_t>(o) * oh + oy) * ow + ox] = acc;
            }
        }
    }
}

template <typename T>
void conv_backward(const T* in, int ih, int iw, int ic, const T* w, int oc, int k, int s, const T* dout,
                   int oh, int ow, T* dw, T* db, T* din) {
    for (int o = 0; o < oc; ++o) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const T g = dout[(static_cast<size_t>(o) * oh + oy) * ow + ox];
                if (g == T(0)) continue;
                db[o] += g;
                for (int c = 0; c < ic; ++c) {
                    T* dwrow = dw + ((static_cast<size_t>(o) * ic + c) * k) * k;
                    const T* wrow = w + ((static_cast<size_t>(o) * ic + c) * k) * k;
                    const T* irow = in + (static_cast<size_t>(c) * ih + oy * s) * iw + ox * s;
                    T* drow = din ? din + (static_cast<size_t>(c) * ih + oy * s) * iw + ox * s : nullptr;
                    for (int ky = 0; ky < k; ++ky) {
                        T* dwp = dwrow + static_cast<size_t>(ky) * k;
                        const T* wp = wrow + static_cast<size_t>(ky) * k;
                        const T* ip = irow + static_cast<size_t>(ky) * iw;
                        T* dp = drow ? drow + static_cast<size_t>(ky) * iw : nullptr;
                        for (int kx = 0; kx < k; ++kx) {
                            dwp[kx] += g * ip[kx];
                            if (dp) dp[kx] += g * wp[kx];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void dense_forward(const T* in, int n_in, const T* w, const T* b, int n_out, T* out) {
    for (int o = 0; o < n_out; ++o) {
        T acc = b[o];
        const T* wrow = w + static_cast<size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) acc += wrow[i] * in[i];
        out[o] = acc;
    }
}

template <typename T>
void dense_backward(const T* in, int n_in, const T* w, int n_out, const T* dout, T* dw, T* db, T* din) {
    if (din) std::fill(din, din + n_in, T(0));
    for (int o = 0; o < n_out; ++o) {
        const T g = dout[o];
        db[o] += g;
        const T* wrow = w + static_cast<size_t>(o) * n_in;
        T* dwrow = dw + static_cast<size_t>(o) * n_in;
        for (int i = 0; i < n_in; ++i) {
            dwrow[i] += g * in[i];
            if (din) din[i] += g * wrow[i];
        }
    }
}

template <typename T>
void relu_inplace(std::vector<T>& v) {
    for (T& x : v)
        if (x < T(0)) x = T(0);
}

}  // namespace

template <typename T>
std::vector<T> QNetwork<T>::forward_cached(std::span<const float> obs, Workspace& ws) const {
    const size_t in_count = static_cast<size_t>(cfg_.input_height) * cfg_.input_width;
    if (obs.size() != in_count) throw std::invalid_argument("network: observation shape mismatch");

    const size_t n_layers = cfg_.convs.size() + cfg_.hidden.size() + 1;
    ws.act.resize(n_layers + 1);
    ws.preact.resize(n_layers);

    ws.act[0].resize(in_count);
    for (size_t i = 0; i < in_count; ++i) ws.act[0][i] = static_cast<T>(obs[i]);

    size_t t = 0;  // tensor cursor: weight, bias per layer in declaration order
    size_t li = 0;
    for (size_t i = 0; i < cfg_.convs.size(); ++i, ++li) {
        const ConvSpec& c = cfg_.convs[i];
        const Dims& din = conv_dims_[i];
        const Dims& dout = conv_dims_[i + 1];
        ws.preact[li].resize(static_cast<size_t>(dout.count()));
        conv_forward(ws.act[li].data(), din.h, din.w, din.c, params_.data() + tensors_[t].offset,
                     params_.data() + tensors_[t + 1].offset, c.out_channels, c.kernel, c.stride,
                     ws.preact[li].data(), dout.h, dout.w);
        t += 2;
        ws.act[li + 1] = ws.preact[li];
        relu_inplace(ws.act[li + 1]);
    }
    for (size_t i = 0; i < cfg_.hidden.size(); ++i, ++li) {
        ws.preact[li].resize(static_cast<size_t>(cfg_.hidden[i]));
        dense_forward(ws.act[li].data(), dense_in_[i], params_.data() + tensors_[t].offset,
                      params_.data() + tensors_[t + 1].offset, cfg_.hidden[i], ws.preact[li].data());
        t += 2;
        ws.act[li + 1] = ws.preact[li];
        relu_inplace(ws.act[li + 1]);
    }
    // linear output
    ws.preact[li].clear();
    ws.act[li + 1].resize(static_cast<size_t>(cfg_.outputs));
    dense_forward(ws.act[li].data(), dense_in_.back(), params_.data() + tensors_[t].offset,
                  params_.data() + tensors_[t + 1].offset, cfg_.outputs, ws.act[li + 1].data());
    return ws.act[li + 1];
}

template <typename T>
std::vector<T> QNetwork<T>::forward(std::span<const float> obs) const {
    Workspace ws;
    return forward_cached(obs, ws);
}

template <typename T>
std::vector<T> QNetwork<T>::forward(const ObservationTensor& obs) const {
    return forward(std::span<const float>(obs.data));
}

template <typename T>
void QNetwork<T>::backward(const Workspace& ws, std::span<const T> dout, std::vector<T>& grad) const {
    if (grad.size() != params_.size()) throw std::invalid_argument("network: gradient buffer size mismatch");
    const size_t n_layers = cfg_.convs.size() + cfg_.hidden.size() + 1;
    std::vector<T> delta(dout.begin(), dout.end());
    std::vector<T> delta_prev;

    // output dense layer
    size_t t = tensors_.size() - 2;
    size_t li = n_layers - 1;
    delta_prev.assign(ws.act[li].size(), T(0));
    dense_backward(ws.act[li].data(), dense_in_.back(), params_.data() + tensors_[t].offset, cfg_.outputs,
                   delta.data(), grad.data() + tensors_[t].offset, grad.data() + tensors_[t + 1].offset,
                   delta_prev.data());
    delta.swap(delta_prev);

    // hidden dense layers, reverse
    for (size_t i = cfg_.hidden.size(); i-- > 0;) {
        --li;
        t -= 2;
        for (size_t j = 0; j < delta.size(); ++j)
            if (ws.preact[li][j] <= T(0)) delta[j] = T(0);
        delta_prev.assign(ws.act[li].size(), T(0));
        dense_backward(ws.act[li].data(), dense_in_[i], params_.data() + tensors_[t].offset,
                       cfg_.hidden[i], delta.data(), grad.data() + tensors_[t].offset,
                       grad.data() + tensors_[t + 1].offset, delta_prev.data());
        delta.swap(delta_prev);
    }

    // conv layers, reverse
    for (size_t i = cfg_.convs.size(); i-- > 0;) {
        --li;
        t -= 2;
        const ConvSpec& c = cfg_.convs[i];
        const Dims& din = conv_dims_[i];
        const Dims& dcur = conv_dims_[i + 1];
        for (size_t j = 0; j < delta.size(); ++j)
            if (ws.preact[li][j] <= T(0)) delta[j] = T(0);
        const bool need_din = i > 0;
        delta_prev.assign(need_din ? ws.act[li].size() : 0, T(0));
        conv_backward(ws.act[li].data(), din.h, din.w, din.c, params_.data() + tensors_[t].offset,
                      c.out_channels, c.kernel, c.stride, delta.data(), dcur.h, dcur.w,
                      grad.data() + tensors_[t].offset, grad.data() + tensors_[t + 1].offset,
                      need_din ? delta_prev.data() : nullptr);
        delta.swap(delta_prev);
    }
}

template <typename T>
void AdamState<T>::apply(std::vector<T>& params, const std::vector<T>& grad) {
    if (m.size() != params.size() || v.size() != params.size())
        throw std::invalid_argument("adam: moment arrays not congruent to parameters");
    ++step;
    const double b1 = beta1, b2 = beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (size_t i = 0; i < params.size(); ++i) {
        const double g = static_cast<double>(grad[i]);
        const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * g;
        const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double mhat = mi / corr1;
        const double vhat = vi / corr2;
        params[i] = static_cast<T>(static_cast<double>(params[i]) -
                                   step_size * mhat / (std::sqrt(vhat) + epsilon_hat));
    }
}

template <typename T>
double train_step(QNetwork<T>& net, AdamState<T>& opt, const std::vector<const float*>& obs_batch,
                  const std::vector<int>& actions, const std::vector<double>& targets,
                  const LossSpec& loss) {
    const size_t batch = obs_batch.size();
    if (batch == 0) throw std::invalid_argument("train_step: empty batch");
    if (actions.size() != batch || targets.size() != batch)
        throw std::invalid_argument("train_step: batch arrays must have equal length");
    if (!(loss.delta > 0.0)) throw std::invalid_argument("train_step: huber delta must be > 0");

    const size_t obs_len = static_cast<size_t>(net.config().input_height) * net.config().input_width;
    std::vector<T> grad(net.param_count(), T(0));
    std::vector<T> dout(static_cast<size_t>(net.config().outputs));
    typename QNetwork<T>::Workspace ws;

    double loss_sum = 0.0;
    for (size_t i = 0; i < batch; ++i) {
        if (!std::isfinite(targets[i])) throw std::runtime_error("train_step: non-finite target");
        const std::vector<T> q = net.forward_cached(std::span<const float>(obs_batch[i], obs_len), ws);
        const int a = actions[i];
        if (a < 0 || a >= net.config().outputs) throw std::invalid_argument("train_step: bad action index");
        const double residual = static_cast<double>(q[a]) - targets[i];
        loss_sum += huber(residual, loss.delta);
        std::fill(dout.begin(), dout.end(), T(0));
        dout[a] = static_cast<T>(huber_grad(residual, loss.delta) / static_cast<double>(batch));
        net.backward(ws, dout, grad);
    }
    const double mean_loss = loss_sum / static_cast<double>(batch);
    if (!std::isfinite(mean_loss)) throw std::runtime_error("train_step: non-finite loss");
    for (const T g : grad)
        if (!std::isfinite(static_cast<double>(g))) throw std::runtime_error("train_step: non-finite gradient");
    opt.apply(net.params(), grad);
    return mean_loss;
}

double gradient_check(const QNetwork<double>& net, const std::vector<float>& obs, int action_index,
                      double perturbation, uint64_t seed, int min_coords) {
    if (!(perturbation > 0.0 && perturbation <= 1e-2))
        throw std::invalid_argument("gradient_check: perturbation must be in (0, 1e-2]");

    QNetwork<double>::Workspace ws;
    QNetwork<double> probe = net;
    const auto q = probe.forward_cached(std::span<const float>(obs), ws);
    if (action_index < 0 || action_index >= static_cast<int>(q.size()))
        throw std::invalid_argument("gradient_check: bad action index");
    std::vector<double> dout(q.size(), 0.0);
    dout[action_index] = 1.0;
    std::vector<double> grad(probe.param_count(), 0.0);
    probe.backward(ws, dout, grad);

    const size_t n = probe.param_count();
    std::vector<size_t> coords;
    if (n <= static_cast<size_t>(min_coords)) {
        coords.resize(n);
        for (size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
        Rng rng(seed);
        coords.reserve(static_cast<size_t>(min_coords));
        for (int i = 0; i < min_coords; ++i)
            coords.push_back(static_cast<size_t>(rng.next_double() * static_cast<double>(n)));
    }

    double max_rel = 0.0;
    for (const size_t c : coords) {
        const double saved = probe.params()[c];
        probe.params()[c] = saved + perturbation;
        const double f_plus = probe.forward(std::span<const float>(obs))[action_index];
        probe.params()[c] = saved - perturbation;
        const double f_minus = probe.forward(std::span<const float>(obs))[action_index];
        probe.params()[c] = saved;
        const double numeric = (f_plus - f_minus) / (2.0 * perturbation);
        const double denom = std::max(std::abs(grad[c]) + std::abs(numeric), 1e-6);
        max_rel = std::max(max_rel, std::abs(grad[c] - numeric) / denom);
    }
    return max_rel;
}

QNetwork<double> to_double(const QNetwork<float>& net) {
    QNetwork<double> out(net.config());
    for (size_t i = 0; i < net.param_count(); ++i) out.params()[i] = static_cast<double>(net.params()[i]);
    return out;
}

template class QNetwork<float>;
template class QNetwork<double>;
template struct AdamState<float>;
template struct AdamState<double>;
template double train_step<float>(QNetwork<float>&, AdamState<float>&, const std::vector<const float*>&,
                                  const std::vector<int>&, const std::vector<double>&, const LossSpec&);
template double train_step<double>(QNetwork<double>&, AdamState<double>&,
                                   const std::vector<const float*>&, const std::vector<int>&,
                                   const std::vector<double>&, const LossSpec&);

}  // namespace deeprotor
