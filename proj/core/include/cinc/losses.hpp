#pragma once

#include <map>
#include <string>
#include <vector>

#include "cinc/autodiff.hpp"
#include "cinc/networks.hpp"

namespace cinc {

/// Loss-term weights.  lambda_cyc/lambda_id drive the two-stage baseline;
/// lambda1..lambda5 drive the joint objective.
struct LossWeights {
    double lambda_cyc = 10.0;
    double lambda_id = 5.0;
    double lambda1 = 10.0;
    double lambda2 = 5.0;
    double lambda3 = 10.0;
    double lambda4 = 1.0;
    double lambda5 = 1.0;
};

/// Whether the F0 branch consumes converted cepstra or true normal cepstra.
enum class Adv2Input { converted, true_normal };

/// Itemized loss values for one batch.  `total` is the weighted sum of the
/// terms; `total_value` is the differentiable handle when the report was
/// built on a live tape.
struct LossReport {
    std::vector<std::pair<std::string, double>> terms;
    double total = 0.0;
    long epoch = 0;
    long step = 0;
    ad::Value total_value;

    double term(const std::string& name) const;
};

/// All nets of a bundle lifted onto one tape.
class BoundBundle {
public:
    BoundBundle(ad::Tape& tape, const ModelBundle& bundle);

    const BoundNet& at(const std::string& role) const;
    bool has(const std::string& role) const { return bound_.count(role) != 0; }
    const ModelBundle& bundle() const { return *bundle_; }

private:
    const ModelBundle* bundle_;
    std::map<std::string, BoundNet> bound_;
};

/// Least-squares adversarial loss, discriminator form:
/// mean (D(real)-1)^2 + mean D(fake)^2.
ad::Value adv_loss(const BoundNet& d, ad::Value real, ad::Value fake);

/// Generator side of the least-squares split: mean (D(fake)-1)^2.
ad::Value gen_adv_loss(const BoundNet& d, ad::Value fake);

/// mean|gback(gfwd(x)) - x| + mean|gfwd(gback(y)) - y|.
ad::Value cycle_loss_bidir(const BoundNet& gxy, const BoundNet& gyx, ad::Value x, ad::Value y);

/// mean|gback(gfwd(a)) - a|, single direction.
ad::Value cycle_loss_oneway(const BoundNet& gfwd, const BoundNet& gback, ad::Value a);

/// mean|gyx(x) - x| + mean|gxy(y) - y|.
ad::Value identity_loss(const BoundNet& gxy, const BoundNet& gyx, ad::Value x, ad::Value y);

/// Three-way whisper-domain adversarial loss coupling both cycles:
/// mean (D_X(x)-1)^2 + mean D_X(G_Y2X(yh))^2 + mean D_X(G_Z2X(G_Y2Z(yh)))^2
/// with yh = G_X2Y(x) computed once and shared by both fake branches.
ad::Value combined_adv3(const BoundNet& dx, const BoundBundle& bundle, ad::Value x);

/// Two-generator/two-discriminator total: both adversarial directions plus
/// weighted bidirectional cycle and identity terms.
/// Terms: adv_xy, adv_yx, cyc, id.
LossReport cyclegan_total(const BoundBundle& bundle, ad::Value x, ad::Value y,
                          const LossWeights& weights);

/// Joint objective over both cycles.
/// Terms: adv1, cyc1, id1, adv2, cyc2, adv3.
/// The F0 branch consumes yh = G_X2Y(x) (or true y under Adv2Input::true_normal);
/// the real side of the F0 adversarial term always uses z.
/// Outer-cycle terms require the outer nets; a bundle restricted to the inner
/// cycle is accepted when lambda3 = lambda4 = lambda5 = 0.
LossReport cinc_total(const BoundBundle& bundle, ad::Value x, ad::Value y, ad::Value z,
                      const LossWeights& weights, Adv2Input adv2_input = Adv2Input::converted);

} // namespace cinc
