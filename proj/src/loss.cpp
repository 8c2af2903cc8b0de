// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace pl {

ad::Var bce_loss(const ad::Var& llrs, const Tensor& bits) {
    if (llrs.value().size() != bits.size())
        throw std::invalid_argument("bce_loss: logit and bit counts differ");
    return ad::bce_with_logits(llrs, bits);
}

namespace {

// index pair achieving the extremal distance, first pair on ties
struct Extremum {
    int i = -1, j = -1;
    double dist = 0.0;
};

Extremum scan_pairs(const Tensor& p, bool want_min) {
    if (p.rank() != 2 || p.dim(1) != 2 || p.dim(0) < 2)
        throw std::invalid_argument("pair distance: need an (n, 2) set with n >= 2");
    const int n = p.dim(0);
    Extremum e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dx = p.at(i, 0) - p.at(j, 0);
            const double dy = p.at(i, 1) - p.at(j, 1);
            const double d = std::sqrt(dx * dx + dy * dy);
            const bool better = (e.i < 0) || (want_min ? d < e.dist : d > e.dist);
            if (better) e = {i, j, d};
        }
    return e;
}

ad::Var pair_distance_op(const ad::Var& pts, bool want_min) {
    const Extremum e = scan_pairs(pts.value(), want_min);
    return ad::make_op(Tensor::scalar(e.dist), {pts}, [e](ad::Node& n) {
        // d = |p_i - p_j|; gradient is the unit difference vector on the
        // achieving pair. A coincident pair has no defined direction,
        // subgradient 0.
        if (e.dist <= 0.0) return;
        const double g = n.grad.item();
        const Tensor& p = n.parents[0]->value;
        Tensor& gp = n.parents[0]->grad;
        const double ux = (p.at(e.i, 0) - p.at(e.j, 0)) / e.dist;
        const double uy = (p.at(e.i, 1) - p.at(e.j, 1)) / e.dist;
        gp.at(e.i, 0) += g * ux;
        gp.at(e.i, 1) += g * uy;
        gp.at(e.j, 0) -= g * ux;
        gp.at(e.j, 1) -= g * uy;
    });
}

} // namespace

ad::Var min_pair_distance(const ad::Var& pts) { return pair_distance_op(pts, true); }
ad::Var max_pair_distance(const ad::Var& pts) { return pair_distance_op(pts, false); }

ad::Var distance_loss(const std::vector<ad::Var>& stream_points, double bias,
                      bool* degenerate) {
    if (stream_points.empty())
        throw std::invalid_argument("distance_loss: no streams");
    if (degenerate) *degenerate = false;
    ad::Var sum;
    for (const ad::Var& pts : stream_points) {
        ad::Var dmin = min_pair_distance(pts);
        ad::Var dmax = max_pair_distance(pts);
        if (degenerate && dmin.value().item() < 1e-9) *degenerate = true;
        ad::Var ratio = ad::div(dmax, ad::clamp_min(dmin, 1e-9));
        sum = sum.valid() ? ad::add(sum, ratio) : ratio;
    }
    const double nt = static_cast<double>(stream_points.size());
    ad::Var mean = ad::scale(sum, 1.0 / nt);
    return ad::relu_(ad::add_const(ad::log_(mean), -bias));
}

ad::Var total_loss(const ad::Var& bce, const ad::Var& dterm, double snr_linear,
                   double lambda) {
    if (!(snr_linear > 0.0))
        throw std::invalid_argument("total_loss: snr must be positive on the linear scale");
    return ad::add(ad::scale(bce, std::log1p(snr_linear)), ad::scale(dterm, lambda));
}

} // namespace pl
