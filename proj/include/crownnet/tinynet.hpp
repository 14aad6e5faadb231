#pragma once

// Minimal CNN core: depthwise 3x3 convolution, 2x2 max pooling, dense layers,
// softmax cross-entropy, reverse-mode gradients and Adam. Everything is
// templated on the scalar so training runs in float and gradient checks in
// double.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crownnet/rng.hpp"

namespace crownnet::nn {

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Plane = Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised when a layer sees a shape off the architecture table.
class ShapeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Shape {
    int channels = 0;
    int height = 0;
    int width = 0;

    std::size_t size() const { return static_cast<std::size_t>(channels) * height * width; }
    friend bool operator==(const Shape&, const Shape&) = default;
    std::string str() const {
        return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
    }
};

/// C x H x W values, row-major within each channel, channels contiguous.
template <class S>
struct Tensor {
    Shape shape;
    Vec<S> values;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(s), values(Vec<S>::Zero(static_cast<Eigen::Index>(s.size()))) {}

    Eigen::Map<Plane<S>> channel(int c) {
        return {values.data() + static_cast<std::size_t>(c) * shape.height * shape.width, shape.height, shape.width};
    }
    Eigen::Map<const Plane<S>> channel(int c) const {
        return {values.data() + static_cast<std::size_t>(c) * shape.height * shape.width, shape.height, shape.width};
    }
    S& at(int c, int y, int x) { return values[(static_cast<Eigen::Index>(c) * shape.height + y) * shape.width + x]; }
    S at(int c, int y, int x) const {
        return values[(static_cast<Eigen::Index>(c) * shape.height + y) * shape.width + x];
    }

    template <class T>
    Tensor<T> cast() const {
        Tensor<T> out;
        out.shape = shape;
        out.values = values.template cast<T>();
        return out;
    }
};

// ---------------------------------------------------------------------------
// Layers

/// Per-channel 3x3 cross-correlation, zero padding 1, stride 1, plus bias.
/// kernels is C x 9 with taps in row-major (ky, kx) order.
template <class S>
Tensor<S> conv3x3_depthwise(const Tensor<S>& in, const Mat<S>& kernels, const Vec<S>& bias) {
    const int C = in.shape.channels, H = in.shape.height, W = in.shape.width;
    if (H < 1 || W < 1) throw ShapeError("conv3x3_depthwise: empty spatial extent");
    if (kernels.rows() != C || kernels.cols() != 9 || bias.size() != C)
        throw ShapeError("conv3x3_depthwise: kernel/bias shape does not match " + in.shape.str());
    Tensor<S> out(in.shape);
    for (int c = 0; c < C; ++c) {
        auto dst = out.channel(c);
        const auto src = in.channel(c);
        dst.setConstant(bias(c));
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int y0 = std::max(0, -dy), x0 = std::max(0, -dx);
                const int h = H - std::abs(dy), w = W - std::abs(dx);
                if (h <= 0 || w <= 0) continue;
                const S k = kernels(c, (dy + 1) * 3 + (dx + 1));
                dst.block(y0, x0, h, w) += k * src.block(y0 + dy, x0 + dx, h, w);
            }
        }
    }
    return out;
}

/// Gradients of conv3x3_depthwise given the upstream gradient.
template <class S>
void conv3x3_depthwise_backward(const Tensor<S>& in, const Mat<S>& kernels, const Tensor<S>& grad_out,
                                Tensor<S>* grad_in, Mat<S>& grad_kernels, Vec<S>& grad_bias) {
    const int C = in.shape.channels, H = in.shape.height, W = in.shape.width;
    if (grad_in) *grad_in = Tensor<S>(in.shape);
    for (int c = 0; c < C; ++c) {
        const auto src = in.channel(c);
        Eigen::Map<Plane<S>> gin(grad_in ? grad_in->values.data() + static_cast<std::size_t>(c) * H * W : nullptr,
                                 grad_in ? H : 0, grad_in ? W : 0);
        const auto g = grad_out.channel(c);
        grad_bias(c) += g.sum();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int y0 = std::max(0, -dy), x0 = std::max(0, -dx);
                const int h = H - std::abs(dy), w = W - std::abs(dx);
                if (h <= 0 || w <= 0) continue;
                const int tap = (dy + 1) * 3 + (dx + 1);
                grad_kernels(c, tap) += (g.block(y0, x0, h, w) * src.block(y0 + dy, x0 + dx, h, w)).sum();
                if (grad_in) gin.block(y0 + dy, x0 + dx, h, w) += kernels(c, tap) * g.block(y0, x0, h, w);
            }
        }
    }
}

/// Max over disjoint 2x2 windows. `argmax` receives the flat input index of
/// each output's winner; ties go to the first in row-major window order.
template <class S>
Tensor<S> maxpool2x2(const Tensor<S>& in, std::vector<Eigen::Index>* argmax = nullptr) {
    const int C = in.shape.channels, H = in.shape.height, W = in.shape.width;
    if (H % 2 != 0 || W % 2 != 0 || H < 2 || W < 2)
        throw ShapeError("maxpool2x2: spatial extent must be even, got " + in.shape.str());
    Tensor<S> out(Shape{C, H / 2, W / 2});
    if (argmax) argmax->assign(out.shape.size(), 0);
    Eigen::Index o = 0;
    for (int c = 0; c < C; ++c) {
        const Eigen::Index base = static_cast<Eigen::Index>(c) * H * W;
        for (int y = 0; y < H; y += 2) {
            for (int x = 0; x < W; x += 2, ++o) {
                Eigen::Index best = base + static_cast<Eigen::Index>(y) * W + x;
                for (const Eigen::Index cand : {best + 1, best + W, best + W + 1})
                    if (in.values[cand] > in.values[best]) best = cand;
                out.values[o] = in.values[best];
                if (argmax) (*argmax)[static_cast<std::size_t>(o)] = best;
            }
        }
    }
    return out;
}

template <class S>
Tensor<S> maxpool2x2_backward(const Tensor<S>& grad_out, const std::vector<Eigen::Index>& argmax, Shape in_shape) {
    Tensor<S> grad_in(in_shape);
    for (Eigen::Index o = 0; o < grad_out.values.size(); ++o)
        grad_in.values[argmax[static_cast<std::size_t>(o)]] += grad_out.values[o];
    return grad_in;
}

/// Affine map with optional ReLU.
template <class S>
Vec<S> dense(const Vec<S>& x, const Mat<S>& weights, const Vec<S>& bias, bool relu) {
    if (weights.cols() != x.size() || weights.rows() != bias.size())
        throw ShapeError("dense: weight " + std::to_string(weights.rows()) + "x" + std::to_string(weights.cols()) +
                         " vs input " + std::to_string(x.size()));
    Vec<S> z = weights * x + bias;
    if (relu) z = z.cwiseMax(S(0));
    return z;
}

template <class S>
struct SoftmaxLoss {
    Vec<S> probs;
    S loss = 0;
    Vec<S> grad_logits;
};

/// Stable softmax and cross-entropy against a one-hot (or soft) target.
template <class S>
SoftmaxLoss<S> softmax_xent(const Vec<S>& logits, const Vec<S>& target) {
    SoftmaxLoss<S> r;
    const Vec<S> shifted = logits.array() - logits.maxCoeff();
    const Vec<S> e = shifted.array().exp();
    const S z = e.sum();
    r.probs = e / z;
    // -sum y log p with log p = shifted - log z
    const Vec<S> log_p = shifted.array() - std::log(z);
    r.loss = -(target.array() * log_p.array()).sum();
    r.grad_logits = r.probs - target;
    return r;
}

template <class S>
Vec<S> softmax(const Vec<S>& logits) {
    const Vec<S> e = (logits.array() - logits.maxCoeff()).exp();
    return e / e.sum();
}

// ---------------------------------------------------------------------------
// Architectures

enum class Architecture { Dsm, Views, ViewsReduced };

std::string to_string(Architecture a);
Architecture parse_architecture(const std::string& s);

struct ArchitectureSpec {
    int towers = 1;
    int channels = 4;      // per tower
    int stages = 6;        // conv+pool pairs per tower
    int input_pixels = 128;
    int side_inputs = 1;
    std::vector<int> side_units;
    std::vector<int> head_units;  // hidden units; a 2-unit softmax layer follows

    int flatten_units() const {
        const int spatial = input_pixels >> stages;
        return towers * channels * spatial * spatial;
    }
};

const ArchitectureSpec& spec_for(Architecture a);

inline constexpr int kClasses = 2;

template <class S>
struct ConvParams {
    Mat<S> kernels;  // C x 9
    Vec<S> bias;     // C
};

template <class S>
struct DenseParams {
    Mat<S> weights;  // out x in
    Vec<S> bias;     // out
};

template <class S>
struct NetworkParams {
    Architecture arch = Architecture::Views;
    std::vector<std::vector<ConvParams<S>>> towers;
    std::vector<DenseParams<S>> side;
    std::vector<DenseParams<S>> head;  // last entry is the 2-unit output layer

    /// Visits every parameter block (matrices and vectors) in declaration order.
    template <class F>
    void visit(F&& f) {
        for (auto& tower : towers)
            for (auto& layer : tower) {
                f(layer.kernels);
                f(layer.bias);
            }
        for (auto* group : {&side, &head})
            for (auto& layer : *group) {
                f(layer.weights);
                f(layer.bias);
            }
    }
    template <class F>
    void visit(F&& f) const {
        const_cast<NetworkParams*>(this)->visit([&](const auto& block) { f(block); });
    }

    Eigen::Index size() const {
        Eigen::Index n = 0;
        visit([&](const auto& b) { n += b.size(); });
        return n;
    }

    NetworkParams zeros_like() const {
        NetworkParams z = *this;
        z.visit([](auto& b) { b.setZero(); });
        return z;
    }

    template <class T>
    NetworkParams<T> cast() const {
        NetworkParams<T> out;
        out.arch = arch;
        for (const auto& tower : towers) {
            auto& t = out.towers.emplace_back();
            for (const auto& l : tower) t.push_back({l.kernels.template cast<T>(), l.bias.template cast<T>()});
        }
        for (const auto& l : side) out.side.push_back({l.weights.template cast<T>(), l.bias.template cast<T>()});
        for (const auto& l : head) out.head.push_back({l.weights.template cast<T>(), l.bias.template cast<T>()});
        return out;
    }
};

template <class S>
Vec<S> flatten(const NetworkParams<S>& p) {
    Vec<S> out(p.size());
    Eigen::Index off = 0;
    p.visit([&](const auto& b) {
        out.segment(off, b.size()) = Eigen::Map<const Vec<S>>(b.data(), b.size());
        off += b.size();
    });
    return out;
}

template <class S>
void unflatten(const Vec<S>& flat, NetworkParams<S>& p) {
    if (flat.size() != p.size()) throw ShapeError("unflatten: parameter count mismatch");
    Eigen::Index off = 0;
    p.visit([&](auto& b) {
        Eigen::Map<Vec<S>>(b.data(), b.size()) = flat.segment(off, b.size());
        off += b.size();
    });
}

/// Glorot-uniform weights, zero biases.
template <class S>
NetworkParams<S> init_params(Architecture arch, std::uint64_t seed) {
    const auto& spec = spec_for(arch);
    Rng rng(seed);
    auto glorot = [&](Eigen::Index rows, Eigen::Index cols, double fan_in, double fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Mat<S> m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = static_cast<S>(rng.uniform(-limit, limit));
        return m;
    };
    NetworkParams<S> p;
    p.arch = arch;
    for (int t = 0; t < spec.towers; ++t) {
        auto& tower = p.towers.emplace_back();
        for (int s = 0; s < spec.stages; ++s)
            tower.push_back({glorot(spec.channels, 9, 9, 9), Vec<S>::Zero(spec.channels)});
    }
    int in = spec.side_inputs;
    for (int units : spec.side_units) {
        p.side.push_back({glorot(units, in, in, units), Vec<S>::Zero(units)});
        in = units;
    }
    in = spec.flatten_units() + spec.side_units.back();
    for (int units : spec.head_units) {
        p.head.push_back({glorot(units, in, in, units), Vec<S>::Zero(units)});
        in = units;
    }
    p.head.push_back({glorot(kClasses, in, in, kClasses), Vec<S>::Zero(kClasses)});
    return p;
}

/// One network input: one tensor per tower plus the scalar side features.
template <class S>
struct NetworkInput {
    std::vector<Tensor<S>> images;
    Vec<S> side;

    template <class T>
    NetworkInput<T> cast() const {
        NetworkInput<T> out;
        for (const auto& im : images) out.images.push_back(im.template cast<T>());
        out.side = side.template cast<T>();
        return out;
    }
};

struct LayerShape {
    std::string layer;
    Shape shape;
};

template <class S>
struct ForwardCache {
    struct Stage {
        Tensor<S> input;
        Tensor<S> activated;  // relu(conv(input))
        std::vector<Eigen::Index> argmax;
    };
    std::vector<std::vector<Stage>> towers;
    std::vector<Vec<S>> side_inputs, side_outputs;
    std::vector<Vec<S>> head_inputs, head_outputs;
    std::vector<LayerShape> shapes;
};

namespace detail {
inline void expect(const Shape& got, const Shape& want, const std::string& layer) {
    if (!(got == want)) throw ShapeError(layer + ": expected " + want.str() + ", got " + got.str());
}
}  // namespace detail

/// Logits of the network. Every layer's output shape is checked against the
/// architecture table; `cache` (optional) keeps what backprop needs.
template <class S>
Vec<S> forward_logits(const NetworkParams<S>& p, const NetworkInput<S>& input, ForwardCache<S>* cache = nullptr) {
    const auto& spec = spec_for(p.arch);
    if (static_cast<int>(input.images.size()) != spec.towers)
        throw ShapeError("network expects " + std::to_string(spec.towers) + " image inputs, got " +
                         std::to_string(input.images.size()));
    if (input.side.size() != spec.side_inputs) throw ShapeError("side feature count mismatch");
    if (cache) {
        *cache = ForwardCache<S>{};
        cache->towers.resize(static_cast<std::size_t>(spec.towers));
    }

    Vec<S> features(spec.flatten_units() + spec.side_units.back());
    Eigen::Index off = 0;
    for (int t = 0; t < spec.towers; ++t) {
        Tensor<S> x = input.images[static_cast<std::size_t>(t)];
        int px = spec.input_pixels;
        const std::string tag = "tower" + std::to_string(t);
        detail::expect(x.shape, {spec.channels, px, px}, tag + "/input");
        if (cache) cache->shapes.push_back({tag + "/input", x.shape});
        for (int s = 0; s < spec.stages; ++s) {
            const auto& layer = p.towers[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)];
            Tensor<S> a = conv3x3_depthwise(x, layer.kernels, layer.bias);
            a.values = a.values.cwiseMax(S(0));
            detail::expect(a.shape, {spec.channels, px, px}, tag + "/conv" + std::to_string(s));
            std::vector<Eigen::Index> argmax;
            Tensor<S> pooled = maxpool2x2(a, cache ? &argmax : nullptr);
            px /= 2;
            detail::expect(pooled.shape, {spec.channels, px, px}, tag + "/pool" + std::to_string(s));
            if (cache) {
                cache->shapes.push_back({tag + "/conv" + std::to_string(s), a.shape});
                cache->shapes.push_back({tag + "/pool" + std::to_string(s), pooled.shape});
                cache->towers[static_cast<std::size_t>(t)].push_back({std::move(x), std::move(a), std::move(argmax)});
            }
            x = std::move(pooled);
        }
        features.segment(off, x.values.size()) = x.values;
        off += x.values.size();
    }
    detail::expect({1, 1, static_cast<int>(off)}, {1, 1, spec.flatten_units()}, "flatten");
    if (cache) cache->shapes.push_back({"flatten", {1, 1, static_cast<int>(off)}});

    Vec<S> h = input.side;
    for (std::size_t i = 0; i < p.side.size(); ++i) {
        if (cache) cache->side_inputs.push_back(h);
        h = dense(h, p.side[i].weights, p.side[i].bias, true);
        if (cache) {
            cache->side_outputs.push_back(h);
            cache->shapes.push_back({"side" + std::to_string(i), {1, 1, static_cast<int>(h.size())}});
        }
    }
    features.tail(h.size()) = h;
    if (cache) cache->shapes.push_back({"concat", {1, 1, static_cast<int>(features.size())}});

    h = features;
    for (std::size_t i = 0; i < p.head.size(); ++i) {
        const bool last = i + 1 == p.head.size();
        if (cache) cache->head_inputs.push_back(h);
        h = dense(h, p.head[i].weights, p.head[i].bias, !last);
        if (cache) {
            cache->head_outputs.push_back(h);
            cache->shapes.push_back({last ? std::string("logits") : "dense" + std::to_string(i),
                                     {1, 1, static_cast<int>(h.size())}});
        }
    }
    return h;
}

/// Class probabilities; index 0 is conifer, 1 deciduous.
template <class S>
Vec<S> network_forward(const NetworkParams<S>& p, const NetworkInput<S>& input) {
    return softmax<S>(forward_logits(p, input));
}

/// Per-layer output shapes of one forward pass.
template <class S>
std::vector<LayerShape> layer_shapes(const NetworkParams<S>& p, const NetworkInput<S>& input) {
    ForwardCache<S> cache;
    forward_logits(p, input, &cache);
    return cache.shapes;
}

template <class S>
struct LossAndGradients {
    S loss = 0;
    Vec<S> probs;
    NetworkParams<S> grads;
};

/// Cross-entropy loss and its exact gradient with respect to every parameter.
template <class S>
LossAndGradients<S> network_gradients(const NetworkParams<S>& p, const NetworkInput<S>& input, const Vec<S>& target) {
    const auto& spec = spec_for(p.arch);
    ForwardCache<S> cache;
    const Vec<S> logits = forward_logits(p, input, &cache);
    auto sl = softmax_xent<S>(logits, target);

    LossAndGradients<S> out;
    out.loss = sl.loss;
    out.probs = sl.probs;
    out.grads = p.zeros_like();

    Vec<S> g = sl.grad_logits;
    for (std::size_t i = p.head.size(); i-- > 0;) {
        const bool last = i + 1 == p.head.size();
        if (!last) g = (cache.head_outputs[i].array() > S(0)).select(g, S(0));
        out.grads.head[i].weights.noalias() += g * cache.head_inputs[i].transpose();
        out.grads.head[i].bias += g;
        g = p.head[i].weights.transpose() * g;
    }
    // g is now the gradient at the concatenated features.
    Vec<S> gs = g.tail(spec.side_units.back());
    for (std::size_t i = p.side.size(); i-- > 0;) {
        gs = (cache.side_outputs[i].array() > S(0)).select(gs, S(0));
        out.grads.side[i].weights.noalias() += gs * cache.side_inputs[i].transpose();
        out.grads.side[i].bias += gs;
        if (i > 0) gs = p.side[i].weights.transpose() * gs;
    }

    Eigen::Index off = 0;
    for (int t = 0; t < spec.towers; ++t) {
        auto& stages = cache.towers[static_cast<std::size_t>(t)];
        const int final_px = spec.input_pixels >> spec.stages;
        Tensor<S> grad(Shape{spec.channels, final_px, final_px});
        grad.values = g.segment(off, static_cast<Eigen::Index>(grad.shape.size()));
        off += grad.values.size();
        for (std::size_t s = stages.size(); s-- > 0;) {
            auto& st = stages[s];
            Tensor<S> ga = maxpool2x2_backward(grad, st.argmax, st.activated.shape);
            ga.values = (st.activated.values.array() > S(0)).select(ga.values, S(0));
            auto& gl = out.grads.towers[static_cast<std::size_t>(t)][s];
            Tensor<S> gin;
            conv3x3_depthwise_backward(st.input, p.towers[static_cast<std::size_t>(t)][s].kernels, ga,
                                       s > 0 ? &gin : nullptr, gl.kernels, gl.bias);
            grad = std::move(gin);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Optimizer and training

template <class S>
struct AdamState {
    Vec<S> m;
    Vec<S> v;
    long t = 0;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(Eigen::Index n, double learning_rate)
        : m(Vec<S>::Zero(n)), v(Vec<S>::Zero(n)), lr(learning_rate) {}
};

/// One Adam update with bias correction.
template <class S>
void adam_step(NetworkParams<S>& params, const NetworkParams<S>& grads, AdamState<S>& state) {
    const Vec<S> g = flatten(grads);
    if (state.m.size() != g.size()) throw ShapeError("adam_step: state does not match parameters");
    state.t += 1;
    const S b1 = static_cast<S>(state.beta1), b2 = static_cast<S>(state.beta2);
    state.m = b1 * state.m + (S(1) - b1) * g;
    state.v = b2 * state.v + (S(1) - b2) * g.cwiseProduct(g);
    const S c1 = static_cast<S>(1.0 - std::pow(state.beta1, static_cast<double>(state.t)));
    const S c2 = static_cast<S>(1.0 - std::pow(state.beta2, static_cast<double>(state.t)));
    const Vec<S> m_hat = state.m / c1;
    const Vec<S> v_hat = state.v / c2;
    Vec<S> theta = flatten(params);
    theta.array() -= static_cast<S>(state.lr) * m_hat.array() / (v_hat.array().sqrt() + static_cast<S>(state.epsilon));
    unflatten(theta, params);
}

struct TrainOptions {
    int epochs = 3;
    int batch_size = 32;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
};

template <class S>
using InputFn = std::function<NetworkInput<S>(std::size_t)>;

template <class S>
Vec<S> one_hot(int label) {
    Vec<S> y = Vec<S>::Zero(kClasses);
    y(label) = S(1);
    return y;
}

template <class S>
int predict_class(const NetworkParams<S>& p, const NetworkInput<S>& input) {
    Eigen::Index best;
    forward_logits(p, input).maxCoeff(&best);
    return static_cast<int>(best);
}

/// Mini-batch Adam over `labels.size()` samples for opts.epochs passes, the
/// order reshuffled each epoch. Returns the training accuracy of the final
/// parameters over every sample.
template <class S>
double train_network(NetworkParams<S>& params, const InputFn<S>& input, std::span<const int> labels,
                     const TrainOptions& opts) {
    const std::size_t n = labels.size();
    if (n == 0) return 0.0;
    Rng rng(opts.seed);
    AdamState<S> state(params.size(), opts.learning_rate);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto batch = static_cast<std::size_t>(std::max(1, opts.batch_size));
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            Vec<S> sum = Vec<S>::Zero(params.size());
            for (std::size_t k = start; k < end; ++k) {
                const auto i = order[k];
                sum += flatten(network_gradients(params, input(i), one_hot<S>(labels[i])).grads);
            }
            NetworkParams<S> mean_grad = params;
            unflatten<S>(sum / static_cast<S>(end - start), mean_grad);
            adam_step(params, mean_grad, state);
        }
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += predict_class(params, input(i)) == labels[i];
    return static_cast<double>(correct) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Snapshots: "TNET" u32 version u32 arch u32 blocks, per block u32 rows u32
// cols, then every value as little-endian f32 in declaration order.

void save_params(const std::filesystem::path& path, const NetworkParams<float>& params);
NetworkParams<float> load_params(const std::filesystem::path& path);

}  // namespace crownnet::nn
