#include "ssmid/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "ssmid/nelder_mead.hpp"
#include "ssmid/sampling.hpp"

namespace ssmid {

double expected_improvement(const GpModel& gp, const Vec& u, double l_star) {
    const auto post = gp.posterior(u);
    const double delta = post.mean - l_star;
    if (post.sd <= 1e-15) return std::max(delta, 0.0);
    const double z = delta / post.sd;
    const double ei = delta * norm_cdf(z) + post.sd * norm_pdf(z);
    return std::max(ei, 0.0);
}

Vec maximize_acquisition(const GpModel& gp, const ParameterSpace& space,
                         const AcqConfig& cfg, double l_star, uint64_t seed) {
    const Eigen::Index d = space.dim();
    Rng rng(seed);
    const Box unit = Box::unit(d);

    ObjectiveFn ei = [&](const Vec& u) { return expected_improvement(gp, u, l_star); };

    Mat starts = halton_shifted(cfg.n_starts, static_cast<int>(d), rng);
    std::vector<std::pair<double, Eigen::Index>> scored;
    scored.reserve(static_cast<size_t>(starts.rows()));
    Vec best_u = starts.row(0).transpose();
    double best_ei = kNegInf;
    for (Eigen::Index i = 0; i < starts.rows(); ++i) {
        const Vec u = starts.row(i).transpose();
        const double v = ei(u);
        scored.emplace_back(v, i);
        if (v > best_ei) {
            best_ei = v;
            best_u = u;
        }
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    const int n_polish = std::min<int>(cfg.n_polish, static_cast<int>(scored.size()));
    for (int i = 0; i < n_polish; ++i) {
        const Vec u0 = starts.row(scored[static_cast<size_t>(i)].second).transpose();
        Simplex init = make_simplex_around(u0, cfg.polish_step, ei, &unit);
        NmStop stop;
        stop.d_lim = 1e-6;
        stop.max_no_improve = static_cast<int>(d) + 2;
        stop.max_evals = cfg.polish_max_evals;
        auto res = nm_run(ei, std::move(init), stop, &unit);
        if (res.best.value > best_ei) {
            best_ei = res.best.value;
            best_u = res.best.x;
        }
    }
    return space.clamp(space.from_unit(best_u));
}

} // namespace ssmid
