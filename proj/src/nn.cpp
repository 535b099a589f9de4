#include "lightyear/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lightyear/data.hpp"

namespace lightyear {

namespace {

double activate(double z, Activation act) {
    switch (act) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::tanh_act: return std::tanh(z);
    }
    throw std::logic_error("unhandled activation");
}

// Derivative expressed through the activation output, which both supported
// nonlinearities allow.
double activate_grad_from_output(double a, Activation act) {
    switch (act) {
        case Activation::relu: return a > 0.0 ? 1.0 : 0.0;
        case Activation::tanh_act: return 1.0 - a * a;
    }
    throw std::logic_error("unhandled activation");
}

// Offset of layer l's weight block; biases follow the weights.
std::size_t layer_offset(const ModelSpec& spec, int l) {
    std::size_t off = 0;
    for (int k = 0; k < l; ++k) {
        const std::size_t in = static_cast<std::size_t>(spec.layer_sizes[k]);
        const std::size_t out = static_cast<std::size_t>(spec.layer_sizes[k + 1]);
        off += in * out + out;
    }
    return off;
}

// Forward pass keeping every activation, as needed for backprop. layers[0]
// is the input copy; the last entry holds raw logits.
std::vector<std::vector<double>> forward_all(const ParamVector& params, std::span<const double> x) {
    const ModelSpec& spec = params.spec;
    const int n_layers = static_cast<int>(spec.layer_sizes.size()) - 1;
    std::vector<std::vector<double>> acts(static_cast<std::size_t>(n_layers) + 1);
    acts[0].assign(x.begin(), x.end());
    std::size_t off = 0;
    for (int l = 0; l < n_layers; ++l) {
        const int in = spec.layer_sizes[l];
        const int out = spec.layer_sizes[l + 1];
        const double* W = params.values.data() + off;
        const double* b = W + static_cast<std::size_t>(in) * out;
        std::vector<double>& z = acts[l + 1];
        z.assign(b, b + out);
        const std::vector<double>& a = acts[l];
        for (int i = 0; i < in; ++i) {
            const double ai = a[i];
            if (ai == 0.0) continue;
            const double* Wrow = W + static_cast<std::size_t>(i) * out;
            for (int j = 0; j < out; ++j) z[j] += ai * Wrow[j];
        }
        if (l + 1 < n_layers)
            for (double& v : z) v = activate(v, spec.activation);
        off += static_cast<std::size_t>(in) * out + out;
    }
    return acts;
}

std::vector<double> softmax_from_logits(std::span<const double> z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        p[k] = std::exp(z[k] - zmax);
        sum += p[k];
    }
    for (double& v : p) v /= sum;
    return p;
}

void check_input_dim(const ParamVector& params, std::size_t got) {
    if (static_cast<std::size_t>(params.spec.input_dim()) != got)
        throw std::invalid_argument("input has " + std::to_string(got) + " features, model expects " +
                                    std::to_string(params.spec.input_dim()));
}

}  // namespace

std::size_t ModelSpec::param_count() const {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        total += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] + layer_sizes[l + 1];
    return total;
}

void ModelSpec::validate() const {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("model needs at least input and output layers");
    for (const int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("layer sizes must be >= 1");
}

void require_same_spec(const ParamVector& a, const ParamVector& b, const std::string& where) {
    if (!(a.spec == b.spec))
        throw std::invalid_argument(where + ": parameter vectors have mismatched architectures");
    if (a.values.size() != b.values.size())
        throw std::invalid_argument(where + ": parameter vectors have mismatched lengths");
}

double l2_norm(const ParamVector& p) {
    double s = 0.0;
    for (const double v : p.values) s += v * v;
    return std::sqrt(s);
}

double l2_distance(const ParamVector& a, const ParamVector& b) {
    require_same_spec(a, b, "l2_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

void Hyper::validate() const {
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must satisfy learning_rate >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must satisfy momentum in [0,1)");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must satisfy weight_decay >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must satisfy batch_size >= 1");
    if (local_epochs < 1) throw std::invalid_argument("local_epochs must satisfy local_epochs >= 1");
}

OptimizerState make_optimizer(const ModelSpec& spec, const Hyper& hyper) {
    hyper.validate();
    OptimizerState opt;
    opt.velocity.assign(spec.param_count(), 0.0);
    opt.hyper = hyper;
    return opt;
}

ParamVector init_params(const ModelSpec& spec, Rng& rng) {
    spec.validate();
    ParamVector p;
    p.spec = spec;
    p.values.resize(spec.param_count());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
        const int in = spec.layer_sizes[l];
        const int out = spec.layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / (in + out));
        for (int i = 0; i < in * out; ++i) p.values[off + i] = rng.uniform(-bound, bound);
        off += static_cast<std::size_t>(in) * out;
        for (int j = 0; j < out; ++j) p.values[off + j] = 0.0;
        off += static_cast<std::size_t>(out);
    }
    return p;
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return init_params(spec, rng);
}

std::vector<double> logits(const ParamVector& params, std::span<const double> x) {
    check_input_dim(params, x.size());
    return forward_all(params, x).back();
}

std::vector<double> predict_proba(const ParamVector& params, std::span<const double> x) {
    return softmax_from_logits(logits(params, x));
}

LossGrad loss_and_grad(const ParamVector& params, const LabeledDataset& batch, double weight_decay) {
    if (batch.size() == 0) throw std::invalid_argument("loss_and_grad: empty batch");
    check_input_dim(params, static_cast<std::size_t>(batch.n_features));
    if (batch.n_classes > params.spec.n_classes())
        throw std::invalid_argument("loss_and_grad: dataset has more classes than the model output");

    const ModelSpec& spec = params.spec;
    const int n_layers = static_cast<int>(spec.layer_sizes.size()) - 1;
    const int n = batch.size();

    LossGrad out;
    out.grad.spec = spec;
    out.grad.values.assign(params.values.size(), 0.0);
    double loss_sum = 0.0;

    for (int r = 0; r < n; ++r) {
        const auto acts = forward_all(params, batch.row(r));
        const std::vector<double> probs = softmax_from_logits(acts.back());
        const int y = batch.labels[r];
        // Clamp keeps a pathological exact-zero probability from producing inf.
        loss_sum += -std::log(std::max(probs[static_cast<std::size_t>(y)], 1e-300));

        // delta at the output: softmax cross-entropy gradient wrt logits.
        std::vector<double> delta = probs;
        delta[static_cast<std::size_t>(y)] -= 1.0;

        for (int l = n_layers - 1; l >= 0; --l) {
            const int in = spec.layer_sizes[l];
            const int out_sz = spec.layer_sizes[l + 1];
            const std::size_t off = layer_offset(spec, l);
            double* gW = out.grad.values.data() + off;
            double* gb = gW + static_cast<std::size_t>(in) * out_sz;
            const std::vector<double>& a = acts[l];
            for (int i = 0; i < in; ++i) {
                const double ai = a[i];
                if (ai != 0.0) {
                    double* gWrow = gW + static_cast<std::size_t>(i) * out_sz;
                    for (int j = 0; j < out_sz; ++j) gWrow[j] += ai * delta[j];
                }
            }
            for (int j = 0; j < out_sz; ++j) gb[j] += delta[j];

            if (l > 0) {
                const double* W = params.values.data() + off;
                std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
                for (int i = 0; i < in; ++i) {
                    const double* Wrow = W + static_cast<std::size_t>(i) * out_sz;
                    double s = 0.0;
                    for (int j = 0; j < out_sz; ++j) s += Wrow[j] * delta[j];
                    prev[i] = s * activate_grad_from_output(a[i], spec.activation);
                }
                delta = std::move(prev);
            }
        }
    }

    const double inv_n = 1.0 / n;
    double sq = 0.0;
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        out.grad.values[i] = out.grad.values[i] * inv_n + weight_decay * params.values[i];
        sq += params.values[i] * params.values[i];
    }
    out.loss = loss_sum * inv_n + 0.5 * weight_decay * sq;
    return out;
}

TrainResult train_local(const ParamVector& params, const OptimizerState& opt,
                        const LabeledDataset& train, std::uint64_t seed) {
    opt.hyper.validate();
    if (train.size() == 0) throw std::invalid_argument("train_local: empty training set");
    if (opt.velocity.size() != params.values.size())
        throw std::invalid_argument("train_local: optimizer state does not match the model");

    TrainResult res{params, opt};
    const Hyper& h = opt.hyper;
    Rng order(seed);
    std::vector<int> idx(static_cast<std::size_t>(train.size()));
    std::iota(idx.begin(), idx.end(), 0);

    for (int epoch = 0; epoch < h.local_epochs; ++epoch) {
        order.shuffle(idx);
        for (int start = 0; start < train.size(); start += h.batch_size) {
            const int stop = std::min(start + h.batch_size, train.size());
            const LabeledDataset batch =
                take_rows(train, std::span<const int>(idx.data() + start,
                                                      static_cast<std::size_t>(stop - start)));
            const LossGrad lg = loss_and_grad(res.params, batch, h.weight_decay);
            for (std::size_t i = 0; i < res.params.values.size(); ++i) {
                res.opt.velocity[i] = h.momentum * res.opt.velocity[i] + lg.grad.values[i];
                res.params.values[i] -= h.learning_rate * res.opt.velocity[i];
            }
        }
    }
    return res;
}

}  // namespace lightyear
