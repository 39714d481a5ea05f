#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cinc/autodiff.hpp"

namespace cinc {

enum class Activation : std::uint8_t { linear = 0, relu = 1, sigmoid = 2 };

const char* to_string(Activation a);

/// One affine layer.  Weights are stored [input_dim x output_dim] so a batch
/// [n x in] maps to [n x out]; bias is a [1 x out] row.
struct Layer {
    ad::Matrix weights;
    ad::Matrix bias;
    Activation activation = Activation::linear;

    Eigen::Index input_dim() const { return weights.rows(); }
    Eigen::Index output_dim() const { return weights.cols(); }
};

/// Feed-forward network: the role of every generator and discriminator.
struct DenseNet {
    std::string name;
    std::vector<Layer> layers;

    Eigen::Index input_dim() const { return layers.front().input_dim(); }
    Eigen::Index output_dim() const { return layers.back().output_dim(); }

    /// Total number of scalar parameters (weights plus biases).
    std::size_t parameter_count() const;

    /// Checks layer dims chain and activations are valid; throws shape_error.
    void validate() const;

    /// Forward pass without recording gradients.
    ad::Matrix infer(const ad::Matrix& batch) const;
};

/// Hidden-layer geometry.  The stock configuration is two hidden layers of
/// 512 units; tests shrink this to keep finite-difference checks fast.
struct NetShape {
    int hidden_units = 512;
    int hidden_layers = 2;
};

enum class GeneratorKind { mcc2mcc, mcc2f0, f02mcc };

/// 40->512->...->40 (mcc2mcc), 40->...->1 (mcc2f0) or 1->...->40 (f02mcc);
/// relu hidden layers, linear output.  Init is uniform fan-in/fan-out scaled,
/// keyed by (seed, name, layer index); biases start at zero.
DenseNet build_generator(GeneratorKind kind, std::uint64_t seed, const std::string& name,
                         const NetShape& shape = {});

/// input_dim (40 or 1) ->512->...->1 with relu hidden layers and sigmoid output.
DenseNet build_discriminator(int input_dim, std::uint64_t seed, const std::string& name,
                             const NetShape& shape = {});

/// Parameter fingerprint (FNV over raw double bits, layer by layer).
std::uint64_t fingerprint(const DenseNet& net);

/// A network lifted onto a tape for one training step: every weight and bias
/// becomes a leaf node so backward() accumulates parameter gradients.
class BoundNet {
public:
    BoundNet(ad::Tape& tape, const DenseNet& net);

    ad::Value forward(ad::Value batch) const;

    const DenseNet& net() const { return *net_; }
    std::size_t layer_count() const { return params_.size(); }
    const ad::Value& weights(std::size_t layer) const { return params_[layer].first; }
    const ad::Value& bias(std::size_t layer) const { return params_[layer].second; }

private:
    ad::Tape* tape_;
    const DenseNet* net_;
    std::vector<std::pair<ad::Value, ad::Value>> params_;
};

/// A network used on a tape with constant parameters: gradients flow through
/// it to its inputs but not into its weights.  The DenseNet must outlive any
/// backward pass on the tape.
class FrozenNet {
public:
    FrozenNet(ad::Tape& tape, const DenseNet& net) : tape_(&tape), net_(&net) {}

    ad::Value forward(ad::Value batch) const;

    const DenseNet& net() const { return *net_; }

private:
    ad::Tape* tape_;
    const DenseNet* net_;
};

enum class BundleKind : std::uint32_t {
    cyclegan_stage1 = 0, // G_X2Y, G_Y2X, D_X, D_Y
    cyclegan_stage2 = 1, // G_Y2Z, G_Z2Y, D_Yp, D_Z
    cyclegan_full = 2,   // both stages merged, for conversion and evaluation
    cincgan = 3,         // G_X2Y, G_Y2X, G_Y2Z, G_Z2Y, G_Z2X, D_X, D_Y, D_Z
};

const char* to_string(BundleKind k);

/// Role-keyed network set for one experiment.
struct ModelBundle {
    BundleKind kind = BundleKind::cincgan;
    std::uint64_t seed = 0;
    std::uint64_t config_fingerprint = 0;
    std::map<std::string, DenseNet> nets;

    const DenseNet& at(const std::string& role) const;
    DenseNet& at(const std::string& role);
    bool has(const std::string& role) const { return nets.count(role) != 0; }

    /// Enforces the generator/discriminator roster for the bundle kind.
    void validate() const;
};

namespace roles {
inline constexpr const char* g_x2y = "G_X2Y";
inline constexpr const char* g_y2x = "G_Y2X";
inline constexpr const char* g_y2z = "G_Y2Z";
inline constexpr const char* g_z2y = "G_Z2Y";
inline constexpr const char* g_z2x = "G_Z2X";
inline constexpr const char* d_x = "D_X";
inline constexpr const char* d_y = "D_Y";
inline constexpr const char* d_yp = "D_Yp";
inline constexpr const char* d_z = "D_Z";
} // namespace roles

/// Builds the full network roster for a training method.
ModelBundle build_bundle(BundleKind kind, std::uint64_t seed, const NetShape& shape = {});

} // namespace cinc
