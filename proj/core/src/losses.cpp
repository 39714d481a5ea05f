#include "cinc/losses.hpp"

namespace cinc {

double LossReport::term(const std::string& name) const {
    for (const auto& [n, v] : terms)
        if (n == name) return v;
    throw config_error("LossReport: no term named '" + name + "'");
}

BoundBundle::BoundBundle(ad::Tape& tape, const ModelBundle& bundle) : bundle_(&bundle) {
    for (const auto& [role, net] : bundle.nets) bound_.emplace(role, BoundNet(tape, net));
}

const BoundNet& BoundBundle::at(const std::string& role) const {
    auto it = bound_.find(role);
    if (it == bound_.end()) throw config_error("BoundBundle: missing role '" + role + "'");
    return it->second;
}

namespace {

void check_nonempty(ad::Value batch, const char* what) {
    if (batch.rows() == 0) throw numeric_error(std::string(what) + ": empty batch");
}

} // namespace

ad::Value adv_loss(const BoundNet& d, ad::Value real, ad::Value fake) {
    check_nonempty(real, "adv_loss(real)");
    check_nonempty(fake, "adv_loss(fake)");
    ad::Tape& t = *real.tape();
    return t.add(t.mean_square(d.forward(real), 1.0), t.mean_square(d.forward(fake), 0.0));
}

ad::Value gen_adv_loss(const BoundNet& d, ad::Value fake) {
    check_nonempty(fake, "gen_adv_loss");
    return fake.tape()->mean_square(d.forward(fake), 1.0);
}

ad::Value cycle_loss_bidir(const BoundNet& gxy, const BoundNet& gyx, ad::Value x, ad::Value y) {
    ad::Tape& t = *x.tape();
    ad::Value x_rec = gyx.forward(gxy.forward(x));
    ad::Value y_rec = gxy.forward(gyx.forward(y));
    return t.add(t.mean_abs_diff(x_rec, x), t.mean_abs_diff(y_rec, y));
}

ad::Value cycle_loss_oneway(const BoundNet& gfwd, const BoundNet& gback, ad::Value a) {
    return a.tape()->mean_abs_diff(gback.forward(gfwd.forward(a)), a);
}

ad::Value identity_loss(const BoundNet& gxy, const BoundNet& gyx, ad::Value x, ad::Value y) {
    ad::Tape& t = *x.tape();
    return t.add(t.mean_abs_diff(gyx.forward(x), x), t.mean_abs_diff(gxy.forward(y), y));
}

ad::Value combined_adv3(const BoundNet& dx, const BoundBundle& bundle, ad::Value x) {
    check_nonempty(x, "combined_adv3");
    ad::Tape& t = *x.tape();
    ad::Value yh = bundle.at(roles::g_x2y).forward(x);
    ad::Value fake_from_y = bundle.at(roles::g_y2x).forward(yh);
    ad::Value fake_from_z = bundle.at(roles::g_z2x).forward(bundle.at(roles::g_y2z).forward(yh));
    ad::Value loss = t.mean_square(dx.forward(x), 1.0);
    loss = t.add(loss, t.mean_square(dx.forward(fake_from_y), 0.0));
    loss = t.add(loss, t.mean_square(dx.forward(fake_from_z), 0.0));
    return loss;
}

LossReport cyclegan_total(const BoundBundle& bundle, ad::Value x, ad::Value y,
                          const LossWeights& weights) {
    ad::Tape& t = *x.tape();
    ad::Value adv_xy = adv_loss(bundle.at(roles::d_y), y, bundle.at(roles::g_x2y).forward(x));
    ad::Value adv_yx = adv_loss(bundle.at(roles::d_x), x, bundle.at(roles::g_y2x).forward(y));
    ad::Value cyc = cycle_loss_bidir(bundle.at(roles::g_x2y), bundle.at(roles::g_y2x), x, y);
    ad::Value id = identity_loss(bundle.at(roles::g_x2y), bundle.at(roles::g_y2x), x, y);

    ad::Value total = t.add(adv_xy, adv_yx);
    total = t.add(total, t.scale(cyc, weights.lambda_cyc));
    total = t.add(total, t.scale(id, weights.lambda_id));

    LossReport r;
    r.terms = {{"adv_xy", adv_xy.scalar()},
               {"adv_yx", adv_yx.scalar()},
               {"cyc", cyc.scalar()},
               {"id", id.scalar()}};
    r.total = total.scalar();
    r.total_value = total;
    return r;
}

LossReport cinc_total(const BoundBundle& bundle, ad::Value x, ad::Value y, ad::Value z,
                      const LossWeights& weights, Adv2Input adv2_input) {
    ad::Tape& t = *x.tape();
    const BoundNet& g_x2y = bundle.at(roles::g_x2y);
    const BoundNet& g_y2x = bundle.at(roles::g_y2x);

    ad::Value yh = g_x2y.forward(x);
    ad::Value adv1 = t.add(t.mean_square(bundle.at(roles::d_y).forward(y), 1.0),
                           t.mean_square(bundle.at(roles::d_y).forward(yh), 0.0));
    ad::Value cyc1 = t.mean_abs_diff(g_y2x.forward(yh), x);
    ad::Value id1 = identity_loss(g_x2y, g_y2x, x, y);

    const bool have_outer = bundle.has(roles::g_y2z) && bundle.has(roles::g_z2y) &&
                            bundle.has(roles::g_z2x) && bundle.has(roles::d_z);
    if (!have_outer &&
        (weights.lambda3 != 0.0 || weights.lambda4 != 0.0 || weights.lambda5 != 0.0))
        throw config_error("cinc_total: outer-cycle nets missing but lambda3/4/5 nonzero");

    ad::Value total = t.add(adv1, t.scale(cyc1, weights.lambda1));
    total = t.add(total, t.scale(id1, weights.lambda2));

    LossReport r;
    r.terms = {{"adv1", adv1.scalar()}, {"cyc1", cyc1.scalar()}, {"id1", id1.scalar()}};

    if (have_outer) {
        check_nonempty(z, "cinc_total(z)");
        const BoundNet& g_y2z = bundle.at(roles::g_y2z);
        const BoundNet& d_z = bundle.at(roles::d_z);

        ad::Value f0_source = adv2_input == Adv2Input::converted ? yh : y;
        ad::Value zh = g_y2z.forward(f0_source);
        ad::Value adv2 =
            t.add(t.mean_square(d_z.forward(z), 1.0), t.mean_square(d_z.forward(zh), 0.0));
        ad::Value cyc2 = t.mean_abs_diff(bundle.at(roles::g_z2y).forward(zh), f0_source);

        // the whisper-domain coupling always runs on the converted chain,
        // whatever feeds the F0 adversarial term
        ad::Value zh_conv = adv2_input == Adv2Input::converted ? zh : g_y2z.forward(yh);
        const BoundNet& d_x = bundle.at(roles::d_x);
        ad::Value fake_from_y = g_y2x.forward(yh);
        ad::Value fake_from_z = bundle.at(roles::g_z2x).forward(zh_conv);
        ad::Value adv3 = t.mean_square(d_x.forward(x), 1.0);
        adv3 = t.add(adv3, t.mean_square(d_x.forward(fake_from_y), 0.0));
        adv3 = t.add(adv3, t.mean_square(d_x.forward(fake_from_z), 0.0));

        total = t.add(total, t.scale(adv2, weights.lambda3));
        total = t.add(total, t.scale(cyc2, weights.lambda4));
        total = t.add(total, t.scale(adv3, weights.lambda5));
        r.terms.emplace_back("adv2", adv2.scalar());
        r.terms.emplace_back("cyc2", cyc2.scalar());
        r.terms.emplace_back("adv3", adv3.scalar());
    } else {
        r.terms.emplace_back("adv2", 0.0);
        r.terms.emplace_back("cyc2", 0.0);
        r.terms.emplace_back("adv3", 0.0);
    }

    r.total = total.scalar();
    r.total_value = total;
    return r;
}

} // namespace cinc
