#include "emca/tinynet.hpp"
#include <limits>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "emca/rng.hpp"

namespace emca {

namespace {

void apply_activation(const Layer& layer, std::vector<double>& z) {
    switch (layer.act) {
        case Activation::identity:
            return;
        case Activation::rectifier:
            for (auto& v : z)
                if (v < 0.0) v = 0.0;
            return;
        case Activation::softmax: {
            const int group_size = layer.out / layer.groups;
            for (int g = 0; g < layer.groups; ++g) {
                double* s = z.data() + static_cast<size_t>(g) * group_size;
                double m = s[0];
                for (int i = 1; i < group_size; ++i) m = std::max(m, s[i]);
                double sum = 0.0;
                for (int i = 0; i < group_size; ++i) {
                    s[i] = std::exp(s[i] - m);
                    sum += s[i];
                }
                for (int i = 0; i < group_size; ++i) s[i] /= sum;
            }
            return;
        }
    }
}

struct Workspace {
    // post-activation per layer, plus the input in front
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> deltas;  // dLoss/dz per layer

    void resize(const DenseNet& net) {
        acts.resize(net.layers.size() + 1);
        deltas.resize(net.layers.size());
        acts[0].resize(net.layers.front().in);
        for (size_t l = 0; l < net.layers.size(); ++l) {
            acts[l + 1].resize(net.layers[l].out);
            deltas[l].resize(net.layers[l].out);
        }
    }
};

void forward_ws(const DenseNet& net, const double* x, Workspace& ws) {
    std::copy(x, x + net.layers.front().in, ws.acts[0].begin());
    for (size_t l = 0; l < net.layers.size(); ++l) {
        const Layer& layer = net.layers[l];
        const std::vector<double>& in = ws.acts[l];
        std::vector<double>& out = ws.acts[l + 1];
        for (int i = 0; i < layer.out; ++i) {
            const double* row = layer.w.data() + static_cast<size_t>(i) * layer.in;
            double acc = layer.b[i];
            for (int j = 0; j < layer.in; ++j) acc += row[j] * in[j];
            out[i] = acc;
        }
        apply_activation(layer, out);
    }
}

// loss gradient w.r.t. the pre-activations, walking the layers backwards;
// the output layer folds softmax and cross-entropy together
void backward_ws(const DenseNet& net, const int* targets, Workspace& ws) {
    const size_t last = net.layers.size() - 1;
    const Layer& out_layer = net.layers[last];
    if (out_layer.act != Activation::softmax)
        throw std::invalid_argument("training requires a softmax output layer");
    const int group_size = out_layer.out / out_layer.groups;

    std::vector<double>& dout = ws.deltas[last];
    const std::vector<double>& p = ws.acts[last + 1];
    for (int g = 0; g < out_layer.groups; ++g) {
        int t = targets[g];
        if (t < 0 || t >= group_size) throw std::invalid_argument("target class out of range");
        for (int i = 0; i < group_size; ++i) {
            size_t idx = static_cast<size_t>(g) * group_size + i;
            dout[idx] = p[idx] - (i == t ? 1.0 : 0.0);
        }
    }

    for (size_t l = last; l-- > 0;) {
        const Layer& upper = net.layers[l + 1];
        const Layer& layer = net.layers[l];
        std::vector<double>& delta = ws.deltas[l];
        const std::vector<double>& dnext = ws.deltas[l + 1];
        for (int j = 0; j < layer.out; ++j) {
            double acc = 0.0;
            for (int i = 0; i < upper.out; ++i)
                acc += upper.w[static_cast<size_t>(i) * upper.in + j] * dnext[i];
            delta[j] = acc;
        }
        const std::vector<double>& a = ws.acts[l + 1];
        switch (layer.act) {
            case Activation::identity:
                break;
            case Activation::rectifier:
                for (int j = 0; j < layer.out; ++j)
                    if (a[j] <= 0.0) delta[j] = 0.0;
                break;
            case Activation::softmax: {
                const int gs = layer.out / layer.groups;
                for (int g = 0; g < layer.groups; ++g) {
                    const double* pg = a.data() + static_cast<size_t>(g) * gs;
                    double* dg = delta.data() + static_cast<size_t>(g) * gs;
                    double dot = 0.0;
                    for (int i = 0; i < gs; ++i) dot += dg[i] * pg[i];
                    for (int i = 0; i < gs; ++i) dg[i] = pg[i] * (dg[i] - dot);
                }
                break;
            }
        }
    }
}

double loss_from_ws(const DenseNet& net, const int* targets, const Workspace& ws) {
    const Layer& out_layer = net.layers.back();
    if (out_layer.act != Activation::softmax)
        throw std::invalid_argument("loss requires a softmax output layer");
    const int group_size = out_layer.out / out_layer.groups;
    const std::vector<double>& p = ws.acts.back();
    double loss = 0.0;
    for (int g = 0; g < out_layer.groups; ++g) {
        double prob = p[static_cast<size_t>(g) * group_size + targets[g]];
        loss -= std::log(std::max(prob, 1e-300));
    }
    return loss;
}

}  // namespace

DenseNet make_net(int input_dim, const std::vector<LayerSpec>& specs, uint64_t seed) {
    if (input_dim <= 0 || specs.empty()) throw std::invalid_argument("empty network");
    Rng rng(seed);
    DenseNet net;
    int in = input_dim;
    for (const auto& spec : specs) {
        if (spec.out <= 0) throw std::invalid_argument("layer width must be positive");
        if (spec.act == Activation::softmax &&
            (spec.groups <= 0 || spec.out % spec.groups != 0))
            throw std::invalid_argument("softmax group count must divide the layer width");
        Layer layer;
        layer.in = in;
        layer.out = spec.out;
        layer.act = spec.act;
        layer.groups = spec.act == Activation::softmax ? spec.groups : 1;
        double bound = std::sqrt(1.0 / in);
        layer.w.resize(static_cast<size_t>(layer.out) * in);
        for (auto& v : layer.w) v = rng.uniform(-bound, bound);
        layer.b.assign(layer.out, 0.0);
        net.layers.push_back(std::move(layer));
        in = spec.out;
    }
    return net;
}

std::vector<double> forward(const DenseNet& net, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("input size mismatch");
    Workspace ws;
    ws.resize(net);
    forward_ws(net, x.data(), ws);
    return ws.acts.back();
}

double sample_loss(const DenseNet& net, const double* x, const int* targets) {
    Workspace ws;
    ws.resize(net);
    forward_ws(net, x, ws);
    return loss_from_ws(net, targets, ws);
}

double mean_loss(const DenseNet& net, const Dataset& data) {
    if (data.input_dim != net.input_dim()) throw std::invalid_argument("dataset width mismatch");
    Workspace ws;
    ws.resize(net);
    double total = 0.0;
    const size_t n = data.size();
    for (size_t i = 0; i < n; ++i) {
        forward_ws(net, data.inputs.data() + i * data.input_dim, ws);
        total += loss_from_ws(net, data.targets.data() + i * data.target_groups, ws);
    }
    return n ? total / n : 0.0;
}

TrainReport train_sgd(DenseNet& net, const Dataset& data, const TrainConfig& cfg) {
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    if (data.input_dim != net.input_dim()) throw std::invalid_argument("dataset width mismatch");
    if (cfg.batch_size <= 0 || cfg.epochs < 0) throw std::invalid_argument("bad train config");
    const Layer& out_layer = net.layers.back();
    if (out_layer.act != Activation::softmax || out_layer.groups != data.target_groups)
        throw std::invalid_argument("output groups must match dataset targets");

    const size_t n = data.size();
    Rng rng(cfg.seed);
    Workspace ws;
    ws.resize(net);

    std::vector<std::vector<double>> gw(net.layers.size()), gb(net.layers.size());
    for (size_t l = 0; l < net.layers.size(); ++l) {
        gw[l].resize(net.layers[l].w.size());
        gb[l].resize(net.layers[l].b.size());
    }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});

    TrainReport report;
    double prev_loss = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (size_t begin = 0; begin < n; begin += cfg.batch_size) {
            size_t end = std::min(n, begin + cfg.batch_size);
            for (auto& g : gw) std::fill(g.begin(), g.end(), 0.0);
            for (auto& g : gb) std::fill(g.begin(), g.end(), 0.0);

            for (size_t pos = begin; pos < end; ++pos) {
                size_t idx = order[pos];
                forward_ws(net, data.inputs.data() + idx * data.input_dim, ws);
                epoch_loss += loss_from_ws(net, data.targets.data() + idx * data.target_groups, ws);
                backward_ws(net, data.targets.data() + idx * data.target_groups, ws);
                for (size_t l = 0; l < net.layers.size(); ++l) {
                    const Layer& layer = net.layers[l];
                    const std::vector<double>& in = ws.acts[l];
                    const std::vector<double>& delta = ws.deltas[l];
                    double* gwl = gw[l].data();
                    for (int i = 0; i < layer.out; ++i) {
                        double d = delta[i];
                        if (d == 0.0) {
                            gwl += layer.in;
                            continue;
                        }
                        for (int j = 0; j < layer.in; ++j) gwl[j] += d * in[j];
                        gwl += layer.in;
                        gb[l][i] += d;
                    }
                }
            }

            double scale = cfg.lr / static_cast<double>(end - begin);
            for (size_t l = 0; l < net.layers.size(); ++l) {
                Layer& layer = net.layers[l];
                const double decay = cfg.lr * cfg.weight_decay;
                for (size_t i = 0; i < layer.w.size(); ++i)
                    layer.w[i] -= scale * gw[l][i] + decay * layer.w[i];
                for (size_t i = 0; i < layer.b.size(); ++i)
                    layer.b[i] -= scale * gb[l][i] + decay * layer.b[i];
            }
            report.steps += 1;
            if (cfg.max_steps > 0 && report.steps >= cfg.max_steps) {
                report.epoch_losses.push_back(epoch_loss / (end ? end : 1));
                return report;
            }
        }
        epoch_loss /= n;
        report.epoch_losses.push_back(epoch_loss);
        if (cfg.min_improvement > 0.0 && prev_loss - epoch_loss < cfg.min_improvement) break;
        prev_loss = epoch_loss;
    }
    return report;
}

double grad_check(const DenseNet& net, const std::vector<double>& x,
                  const std::vector<int>& targets) {
    DenseNet work = net;
    Workspace ws;
    ws.resize(work);
    forward_ws(work, x.data(), ws);
    backward_ws(work, targets.data(), ws);

    // analytic parameter gradients from the deltas
    std::vector<std::vector<double>> gw(work.layers.size()), gb(work.layers.size());
    for (size_t l = 0; l < work.layers.size(); ++l) {
        const Layer& layer = work.layers[l];
        gw[l].resize(layer.w.size());
        gb[l].resize(layer.b.size());
        for (int i = 0; i < layer.out; ++i) {
            for (int j = 0; j < layer.in; ++j)
                gw[l][static_cast<size_t>(i) * layer.in + j] = ws.deltas[l][i] * ws.acts[l][j];
            gb[l][i] = ws.deltas[l][i];
        }
    }

    const double h = 1e-4;
    double worst = 0.0;
    auto probe = [&](double& param, double analytic) {
        double saved = param;
        param = saved + h;
        double up = sample_loss(work, x.data(), targets.data());
        param = saved - h;
        double down = sample_loss(work, x.data(), targets.data());
        param = saved;
        double numeric = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(numeric - analytic));
    };
    for (size_t l = 0; l < work.layers.size(); ++l) {
        for (size_t i = 0; i < work.layers[l].w.size(); ++i) probe(work.layers[l].w[i], gw[l][i]);
        for (size_t i = 0; i < work.layers[l].b.size(); ++i) probe(work.layers[l].b[i], gb[l][i]);
    }
    return worst;
}

}  // namespace emca
