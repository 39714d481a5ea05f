#include "cinc/networks.hpp"

#include <cmath>

#include "cinc/rng.hpp"

namespace cinc {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

const char* to_string(BundleKind k) {
    switch (k) {
        case BundleKind::cyclegan_stage1: return "cyclegan_stage1";
        case BundleKind::cyclegan_stage2: return "cyclegan_stage2";
        case BundleKind::cyclegan_full: return "cyclegan_full";
        case BundleKind::cincgan: return "cincgan";
    }
    return "?";
}

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

void DenseNet::validate() const {
    if (layers.empty()) throw shape_error("DenseNet '" + name + "' has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        if (l.bias.rows() != 1 || l.bias.cols() != l.weights.cols())
            throw shape_error("DenseNet '" + name + "' layer " + std::to_string(i) +
                              ": bias shape does not match weight columns");
        if (i > 0 && layers[i - 1].output_dim() != l.input_dim())
            throw shape_error("DenseNet '" + name + "' layer " + std::to_string(i) +
                              ": input dim " + std::to_string(l.input_dim()) +
                              " does not chain from previous output dim " +
                              std::to_string(layers[i - 1].output_dim()));
    }
}

ad::Matrix DenseNet::infer(const ad::Matrix& batch) const {
    if (batch.cols() != input_dim())
        throw shape_error("DenseNet '" + name + "': batch has " + std::to_string(batch.cols()) +
                          " columns, expected " + std::to_string(input_dim()));
    ad::Matrix h = batch;
    for (const Layer& l : layers) {
        ad::Matrix z = h * l.weights;
        z.rowwise() += l.bias.row(0);
        switch (l.activation) {
            case Activation::linear: break;
            case Activation::relu: z = z.cwiseMax(0.0); break;
            case Activation::sigmoid:
                z = z.unaryExpr([](double x) {
                    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                    const double e = std::exp(x);
                    return e / (1.0 + e);
                });
                break;
        }
        h = std::move(z);
    }
    return h;
}

namespace {

Layer make_layer(int in, int out, Activation act, std::uint64_t seed, const std::string& name,
                 std::size_t layer_index) {
    KeyedRng rng(seed, name, layer_index);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer l;
    l.weights.resize(in, out);
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
            l.weights(r, c) = rng.next_uniform(-bound, bound);
    l.bias = ad::Matrix::Zero(1, out);
    l.activation = act;
    return l;
}

DenseNet make_net(int in, int out, Activation output_act, std::uint64_t seed,
                  const std::string& name, const NetShape& shape) {
    if (shape.hidden_layers < 1) throw config_error("NetShape: hidden_layers must be >= 1");
    if (shape.hidden_units < 1) throw config_error("NetShape: hidden_units must be >= 1");
    DenseNet net;
    net.name = name;
    int prev = in;
    for (int i = 0; i < shape.hidden_layers; ++i) {
        net.layers.push_back(make_layer(prev, shape.hidden_units, Activation::relu, seed, name,
                                        net.layers.size()));
        prev = shape.hidden_units;
    }
    net.layers.push_back(make_layer(prev, out, output_act, seed, name, net.layers.size()));
    net.validate();
    return net;
}

} // namespace

DenseNet build_generator(GeneratorKind kind, std::uint64_t seed, const std::string& name,
                         const NetShape& shape) {
    switch (kind) {
        case GeneratorKind::mcc2mcc: return make_net(40, 40, Activation::linear, seed, name, shape);
        case GeneratorKind::mcc2f0: return make_net(40, 1, Activation::linear, seed, name, shape);
        case GeneratorKind::f02mcc: return make_net(1, 40, Activation::linear, seed, name, shape);
    }
    throw config_error("build_generator: invalid kind");
}

DenseNet build_discriminator(int input_dim, std::uint64_t seed, const std::string& name,
                             const NetShape& shape) {
    if (input_dim != 1 && input_dim != 40)
        throw config_error("build_discriminator: input_dim must be 1 or 40, got " +
                           std::to_string(input_dim));
    return make_net(input_dim, 1, Activation::sigmoid, seed, name, shape);
}

std::uint64_t fingerprint(const DenseNet& net) {
    std::uint64_t h = fnv1a64(net.name);
    for (const Layer& l : net.layers) {
        h = fnv1a64(l.weights.data(), sizeof(double) * static_cast<std::size_t>(l.weights.size()), h);
        h = fnv1a64(l.bias.data(), sizeof(double) * static_cast<std::size_t>(l.bias.size()), h);
        h = hash_combine(h, static_cast<std::uint64_t>(l.activation));
    }
    return h;
}

BoundNet::BoundNet(ad::Tape& tape, const DenseNet& net) : tape_(&tape), net_(&net) {
    params_.reserve(net.layers.size());
    for (const Layer& l : net.layers)
        params_.emplace_back(tape.leaf(l.weights), tape.leaf(l.bias));
}

ad::Value BoundNet::forward(ad::Value batch) const {
    if (batch.cols() != net_->input_dim())
        throw shape_error("forward '" + net_->name + "': batch has " +
                          std::to_string(batch.cols()) + " columns, expected " +
                          std::to_string(net_->input_dim()));
    ad::Value h = batch;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        h = tape_->add_row(tape_->matmul(h, params_[i].first), params_[i].second);
        switch (net_->layers[i].activation) {
            case Activation::linear: break;
            case Activation::relu: h = tape_->relu(h); break;
            case Activation::sigmoid: h = tape_->sigmoid(h); break;
        }
    }
    return h;
}

ad::Value FrozenNet::forward(ad::Value batch) const {
    if (batch.cols() != net_->input_dim())
        throw shape_error("forward '" + net_->name + "': batch has " +
                          std::to_string(batch.cols()) + " columns, expected " +
                          std::to_string(net_->input_dim()));
    ad::Value h = batch;
    for (const Layer& l : net_->layers) {
        h = tape_->add_row_const(tape_->matmul_const(h, &l.weights), &l.bias);
        switch (l.activation) {
            case Activation::linear: break;
            case Activation::relu: h = tape_->relu(h); break;
            case Activation::sigmoid: h = tape_->sigmoid(h); break;
        }
    }
    return h;
}

const DenseNet& ModelBundle::at(const std::string& role) const {
    auto it = nets.find(role);
    if (it == nets.end())
        throw config_error("ModelBundle(" + std::string(to_string(kind)) + "): missing role '" +
                           role + "'");
    return it->second;
}

DenseNet& ModelBundle::at(const std::string& role) {
    auto it = nets.find(role);
    if (it == nets.end())
        throw config_error("ModelBundle(" + std::string(to_string(kind)) + "): missing role '" +
                           role + "'");
    return it->second;
}

void ModelBundle::validate() const {
    auto require = [&](std::initializer_list<const char*> wanted) {
        if (nets.size() != wanted.size())
            throw config_error("ModelBundle(" + std::string(to_string(kind)) + "): expected " +
                               std::to_string(wanted.size()) + " nets, got " +
                               std::to_string(nets.size()));
        for (const char* role : wanted) at(role);
    };
    switch (kind) {
        case BundleKind::cyclegan_stage1:
            require({roles::g_x2y, roles::g_y2x, roles::d_x, roles::d_y});
            break;
        case BundleKind::cyclegan_stage2:
            require({roles::g_y2z, roles::g_z2y, roles::d_yp, roles::d_z});
            break;
        case BundleKind::cyclegan_full:
            require({roles::g_x2y, roles::g_y2x, roles::d_x, roles::d_y, roles::g_y2z,
                     roles::g_z2y, roles::d_yp, roles::d_z});
            break;
        case BundleKind::cincgan:
            require({roles::g_x2y, roles::g_y2x, roles::g_y2z, roles::g_z2y, roles::g_z2x,
                     roles::d_x, roles::d_y, roles::d_z});
            break;
    }
    for (const auto& [role, net] : nets) net.validate();
}

ModelBundle build_bundle(BundleKind kind, std::uint64_t seed, const NetShape& shape) {
    ModelBundle b;
    b.kind = kind;
    b.seed = seed;
    auto gen = [&](GeneratorKind k, const char* role) {
        b.nets.emplace(role, build_generator(k, seed, role, shape));
    };
    auto dis = [&](int dim, const char* role) {
        b.nets.emplace(role, build_discriminator(dim, seed, role, shape));
    };
    switch (kind) {
        case BundleKind::cyclegan_stage1:
            gen(GeneratorKind::mcc2mcc, roles::g_x2y);
            gen(GeneratorKind::mcc2mcc, roles::g_y2x);
            dis(40, roles::d_x);
            dis(40, roles::d_y);
            break;
        case BundleKind::cyclegan_stage2:
            gen(GeneratorKind::mcc2f0, roles::g_y2z);
            gen(GeneratorKind::f02mcc, roles::g_z2y);
            dis(40, roles::d_yp);
            dis(1, roles::d_z);
            break;
        case BundleKind::cyclegan_full:
            throw config_error("build_bundle: cyclegan_full is assembled from trained stages");
        case BundleKind::cincgan:
            gen(GeneratorKind::mcc2mcc, roles::g_x2y);
            gen(GeneratorKind::mcc2mcc, roles::g_y2x);
            gen(GeneratorKind::mcc2f0, roles::g_y2z);
            gen(GeneratorKind::f02mcc, roles::g_z2y);
            gen(GeneratorKind::f02mcc, roles::g_z2x);
            dis(40, roles::d_x);
            dis(40, roles::d_y);
            dis(1, roles::d_z);
            break;
    }
    b.validate();
    return b;
}

} // namespace cinc
