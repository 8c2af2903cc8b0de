// SPDX-License-Identifier: Apache-2.0
#include "pilotlink/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pilotlink/rng.hpp"

namespace pl {

static double eval_value(const std::function<ad::Var(const std::vector<ad::Var>&)>& build,
                         const std::vector<Tensor>& params) {
    std::vector<ad::Var> leaves;
    leaves.reserve(params.size());
    for (const auto& t : params) leaves.push_back(ad::leaf(t));
    ad::Var root = build(leaves);
    if (root.value().size() != 1)
        throw std::invalid_argument("finite_diff_check: build must return a scalar");
    return root.value()[0];
}

double finite_diff_check(const std::function<ad::Var(const std::vector<ad::Var>&)>& build,
                         const std::vector<Tensor>& params, const FdOptions& opt) {
    if (opt.eps <= 0.0) throw std::invalid_argument("finite_diff_check: eps must be positive");

    std::vector<ad::Var> leaves;
    leaves.reserve(params.size());
    for (const auto& t : params) leaves.push_back(ad::leaf(t));
    ad::Var root = build(leaves);
    if (root.value().size() != 1)
        throw std::invalid_argument("finite_diff_check: build must return a scalar");
    ad::backward(root);

    std::vector<Tensor> analytic;
    analytic.reserve(leaves.size());
    for (const auto& l : leaves) analytic.push_back(l.grad());

    std::vector<Tensor> work = params;
    double worst = 0.0;
    for (std::size_t pi = 0; pi < work.size(); ++pi) {
        const std::size_t n = work[pi].size();
        std::vector<std::size_t> coords;
        if (opt.max_coords_per_param < 0 ||
            static_cast<std::size_t>(opt.max_coords_per_param) >= n) {
            coords.resize(n);
            for (std::size_t c = 0; c < n; ++c) coords[c] = c;
        } else {
            rng::Stream st(rng::derive(opt.sample_seed, {rng::label("fdcheck"), pi}));
            std::vector<std::size_t> all(n);
            for (std::size_t c = 0; c < n; ++c) all[c] = c;
            for (int take = 0; take < opt.max_coords_per_param && !all.empty(); ++take) {
                const std::size_t k = static_cast<std::size_t>(st.next_u64() % all.size());
                coords.push_back(all[k]);
                all[k] = all.back();
                all.pop_back();
            }
        }
        for (std::size_t c : coords) {
            const double orig = work[pi][c];
            work[pi][c] = orig + opt.eps;
            const double fp = eval_value(build, work);
            work[pi][c] = orig - opt.eps;
            const double fm = eval_value(build, work);
            work[pi][c] = orig;
            const double fd = (fp - fm) / (2.0 * opt.eps);
            const double ga = analytic[pi][c];
            const double denom = std::max({std::fabs(ga), std::fabs(fd), opt.abs_floor});
            worst = std::max(worst, std::fabs(ga - fd) / denom);
        }
    }
    return worst;
}

} // namespace pl
