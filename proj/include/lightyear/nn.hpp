#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lightyear/rng.hpp"

namespace lightyear {

enum class Activation { relu, tanh_act };

// Dense feed-forward classifier shape: layer_sizes = [input, hidden..., n_classes].
struct ModelSpec {
    std::vector<int> layer_sizes;
    Activation activation = Activation::relu;

    int input_dim() const { return layer_sizes.front(); }
    int n_classes() const { return layer_sizes.back(); }
    std::size_t param_count() const;

    // Throws std::invalid_argument if fewer than two layers or any size < 1.
    void validate() const;

    bool operator==(const ModelSpec&) const = default;
};

// Flat parameter vector. Layout per layer l: W_l row-major as [in][out],
// then b_l. Carried by value; all arithmetic is on `values`.
struct ParamVector {
    ModelSpec spec;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

// Throws std::invalid_argument when two parameter vectors belong to
// different architectures. `where` names the offending operation.
void require_same_spec(const ParamVector& a, const ParamVector& b, const std::string& where);

double l2_norm(const ParamVector& p);
double l2_distance(const ParamVector& a, const ParamVector& b);

struct Hyper {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    int batch_size = 32;
    int local_epochs = 1;

    void validate() const;
};

// SGD momentum buffer, same layout as the parameters it tracks.
struct OptimizerState {
    std::vector<double> velocity;
    Hyper hyper;
};

OptimizerState make_optimizer(const ModelSpec& spec, const Hyper& hyper);

struct LabeledDataset;  // data.hpp

// Xavier-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
// Same (spec, seed) always yields the same vector.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);
ParamVector init_params(const ModelSpec& spec, Rng& rng);

// Softmax class probabilities for one input row, computed with max
// subtraction so large logits cannot overflow.
std::vector<double> predict_proba(const ParamVector& params, std::span<const double> x);

// Raw pre-softmax outputs; argmax(logits) == argmax(predict_proba).
std::vector<double> logits(const ParamVector& params, std::span<const double> x);

struct LossGrad {
    double loss = 0.0;
    ParamVector grad;
};

// Mean cross-entropy over the batch plus (weight_decay/2) * ||params||^2,
// with the exact analytic gradient of that objective.
LossGrad loss_and_grad(const ParamVector& params, const LabeledDataset& batch, double weight_decay);

struct TrainResult {
    ParamVector params;
    OptimizerState opt;
};

// Minibatch SGD with momentum: v <- m*v + g, theta <- theta - lr*v.
// Indices are reshuffled from `seed` each epoch; the final short batch is
// kept. Inputs are untouched.
TrainResult train_local(const ParamVector& params, const OptimizerState& opt,
                        const LabeledDataset& train, std::uint64_t seed);

}  // namespace lightyear
