#pragma once

#include <cstdint>
#include <vector>

namespace emca {

enum class Activation { rectifier, softmax, identity };

struct LayerSpec {
    int out = 0;
    Activation act = Activation::identity;
    int groups = 1;  // softmax only: activation applied per contiguous group
};

struct Layer {
    int in = 0, out = 0;
    Activation act = Activation::identity;
    int groups = 1;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;
};

struct DenseNet {
    std::vector<Layer> layers;
    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
};

// Supervised set with one class target per output group.
struct Dataset {
    int input_dim = 0;
    int target_groups = 1;
    std::vector<double> inputs;  // size() x input_dim
    std::vector<int> targets;    // size() x target_groups
    size_t size() const { return input_dim ? inputs.size() / input_dim : 0; }
};

struct TrainConfig {
    double lr = 0.01;
    double weight_decay = 0.0;
    int epochs = 30;
    int batch_size = 8;
    uint64_t seed = 0;
    // stop early when the epoch mean loss improves by less than this (0 = off)
    double min_improvement = 0.0;
    // hard cap on SGD steps across all epochs (0 = unlimited)
    long max_steps = 0;
};

struct TrainReport {
    std::vector<double> epoch_losses;
    long steps = 0;
};

// Weights drawn from U(-sqrt(1/fan_in), +sqrt(1/fan_in)), biases zero.
DenseNet make_net(int input_dim, const std::vector<LayerSpec>& layers, uint64_t seed);

std::vector<double> forward(const DenseNet& net, const std::vector<double>& x);

// Cross-entropy of the softmax output groups against integer class targets.
// The final layer must be a softmax.
double sample_loss(const DenseNet& net, const double* x, const int* targets);
double mean_loss(const DenseNet& net, const Dataset& data);

// Minibatch SGD on the cross-entropy loss, gradients averaged over the batch,
// weight decay applied to every parameter. Sample order is reshuffled each
// epoch from cfg.seed, so training is deterministic.
TrainReport train_sgd(DenseNet& net, const Dataset& data, const TrainConfig& cfg);

// Maximum absolute difference between backprop gradients and central finite
// differences (h = 1e-4) on one sample, over every parameter.
double grad_check(const DenseNet& net, const std::vector<double>& x,
                  const std::vector<int>& targets);

}  // namespace emca
