#include <doctest.h>

#include <cmath>

#include "ssmid/acquisition.hpp"
#include "ssmid/gp.hpp"

using namespace ssmid;

namespace {

ParameterSpace unit_space(int d) {
    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
    return ParameterSpace(names, Vec::Zero(d), Vec::Ones(d));
}

// Direct dense-inverse implementation of the posterior mean/variance with a
// constant prior mean; the reference the Cholesky path must reproduce.
std::pair<double, double> dense_posterior(const ObservationPool& pool,
                                          const ParameterSpace& space,
                                          const KernelSpec& kern, const Vec& u) {
    std::vector<Vec> xs;
    std::vector<double> ys;
    for (size_t i = 0; i < pool.size(); ++i)
        if (std::isfinite(pool[i].value)) {
            xs.push_back(space.to_unit(pool[i].theta));
            ys.push_back(pool[i].value);
        }
    const Eigen::Index q = static_cast<Eigen::Index>(xs.size());
    double mu0 = 0.0, sd0 = 0.0;
    for (double y : ys) mu0 += y;
    mu0 /= static_cast<double>(q);
    for (double y : ys) sd0 += (y - mu0) * (y - mu0);
    sd0 = std::sqrt(sd0 / static_cast<double>(q));
    if (sd0 < 1e-12) sd0 = 1.0;

    Mat k(q, q);
    for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = 0; j < q; ++j)
            k(i, j) = kernel_eval(kern, xs[static_cast<size_t>(i)], xs[static_cast<size_t>(j)]);
    k.diagonal().array() += kern.noise_var;
    const Mat k_inv = k.inverse();

    Vec kbar(q), y(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        kbar[i] = kernel_eval(kern, u, xs[static_cast<size_t>(i)]);
        y[i] = (ys[static_cast<size_t>(i)] - mu0) / sd0;
    }
    const double mean = mu0 + sd0 * kbar.dot(k_inv * y);
    const double var = kernel_eval(kern, u, u) - kbar.dot(k_inv * kbar);
    return {mean, sd0 * std::sqrt(std::max(0.0, var))};
}

} // namespace

TEST_SUITE_BEGIN("gp");

TEST_CASE("kernel values") {
    KernelSpec k;
    k.family = KernelFamily::SquaredExponential;
    k.signal_var = 2.0;
    k.lengthscales = Vec::Constant(1, 0.5);
    k.noise_var = 0.0;

    Vec a = Vec::Zero(1), b = Vec::Constant(1, 0.5);
    CHECK(kernel_eval(k, a, a) == doctest::Approx(2.0));
    // distance equal to the lengthscale: exp(-1/2)
    CHECK(kernel_eval(k, a, b) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-12));

    k.family = KernelFamily::Matern52;
    CHECK(kernel_eval(k, a, a) == doctest::Approx(2.0));

    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        Vec x = rng.normal_vec(3), y = rng.normal_vec(3);
        KernelSpec m;
        m.family = KernelFamily::Matern52;
        m.signal_var = 1.3;
        m.lengthscales = Vec::Constant(3, 0.7);
        m.noise_var = 0.0;
        CHECK(kernel_eval(m, x, y) == doctest::Approx(kernel_eval(m, y, x)));
        CHECK(kernel_eval(m, x, y) <= m.signal_var + 1e-12);
    }

    KernelSpec bad = k;
    bad.signal_var = -1.0;
    CHECK_THROWS_AS(kernel_eval(bad, a, b), ConfigError);
}

TEST_CASE("observation pool bookkeeping") {
    ObservationPool pool;
    pool.add(Vec::Constant(1, 0.1), -5.0);
    pool.add(Vec::Constant(1, 0.2), kNegInf);
    pool.add(Vec::Constant(1, 0.3), -2.0);
    pool.add(Vec::Constant(1, 0.4), -3.0);
    CHECK(pool.finite_count() == 3);
    CHECK(pool.best_value() == -2.0);
    CHECK(*pool.best_index() == 2);
    CHECK(pool.rank_of_value(-2.0) == 1);
    CHECK(pool.rank_of_value(-2.5) == 2);
    CHECK(pool.rank_of_value(kNegInf) > 4);
    const auto top = pool.top_indices(2);
    REQUIRE(top.size() == 2);
    CHECK(top[0] == 2);
    CHECK(top[1] == 3);
}

TEST_CASE("gp fit interpolates near-noiseless data") {
    const auto space = unit_space(1);
    ObservationPool pool;
    auto f = [](double x) { return std::sin(6.0 * x); };
    for (double x : {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95})
        pool.add(Vec::Constant(1, x), f(x));

    GpTrainConfig cfg;
    const GpModel gp = GpModel::fit(pool, space, KernelFamily::Matern52, cfg, 1);
    for (size_t i = 0; i < pool.size(); ++i) {
        const auto post = gp.posterior(space.to_unit(pool[i].theta));
        CHECK(post.mean == doctest::Approx(pool[i].value).epsilon(0.02));
        CHECK(post.sd < 0.1);
    }
}

TEST_CASE("gp posterior reverts to the prior far from data") {
    const auto space = unit_space(1);
    ObservationPool pool;
    pool.add(Vec::Constant(1, 0.01), 1.0);
    pool.add(Vec::Constant(1, 0.02), 1.2);
    pool.add(Vec::Constant(1, 0.03), 0.8);

    KernelSpec kern;
    kern.family = KernelFamily::SquaredExponential;
    kern.signal_var = 1.0;
    kern.lengthscales = Vec::Constant(1, 0.02);
    kern.noise_var = 1e-6;
    const GpModel gp = GpModel::condition(pool, space, kern);
    const auto post = gp.posterior(Vec::Constant(1, 0.99));
    CHECK(post.mean == doctest::Approx(1.0).epsilon(1e-6)); // prior mean = target mean
    // prior sd in target units: y_sd * sqrt(signal_var)
    const double y_sd = std::sqrt(((1.0 - 1.0) * 0.0 + 0.04 + 0.04) / 3.0);
    CHECK(post.sd == doctest::Approx(y_sd).epsilon(1e-3));
}

TEST_CASE("cholesky posterior equals the dense-inverse reference") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng.integer(3));
        const auto space = unit_space(d);
        ObservationPool pool;
        const int q = 3 + static_cast<int>(rng.integer(48));
        for (int i = 0; i < q; ++i) {
            Vec x(d);
            for (int j = 0; j < d; ++j) x[j] = rng.uniform();
            pool.add(x, std::sin(3.0 * x.sum()) + 0.1 * rng.normal());
        }
        KernelSpec kern;
        kern.family = trial % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential;
        kern.signal_var = 0.8;
        kern.lengthscales = Vec::Constant(d, 0.4);
        kern.noise_var = 1e-4;
        const GpModel gp = GpModel::condition(pool, space, kern);
        for (int probe = 0; probe < 5; ++probe) {
            Vec u(d);
            for (int j = 0; j < d; ++j) u[j] = rng.uniform();
            const auto post = gp.posterior(u);
            const auto [mean, sd] = dense_posterior(pool, space, kern, u);
            CHECK(post.mean == doctest::Approx(mean).epsilon(1e-8));
            CHECK(post.sd == doctest::Approx(sd).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("gp fit recovers a known lengthscale within a factor of two") {
    // draw functions from a known 1-D GP and refit
    const auto space = unit_space(1);
    const double true_ls = 0.3;
    std::vector<double> recovered;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const int q = 25;
        Mat x(q, 1);
        for (int i = 0; i < q; ++i) x(i, 0) = rng.uniform();
        KernelSpec kern;
        kern.family = KernelFamily::SquaredExponential;
        kern.signal_var = 1.0;
        kern.lengthscales = Vec::Constant(1, true_ls);
        kern.noise_var = 0.0;
        Mat k(q, q);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                k(i, j) = kernel_eval(kern, x.row(i).transpose(), x.row(j).transpose());
        k.diagonal().array() += 1e-8;
        const Mat l = Eigen::LLT<Mat>(k).matrixL();
        const Vec y = l * rng.normal_vec(q);

        ObservationPool pool;
        for (int i = 0; i < q; ++i) pool.add(x.row(i).transpose(), y[i]);
        GpTrainConfig cfg;
        const GpModel gp = GpModel::fit(pool, space, KernelFamily::SquaredExponential,
                                        cfg, seed);
        recovered.push_back(gp.kernel().lengthscales[0]);
    }
    std::sort(recovered.begin(), recovered.end());
    const double median = recovered[recovered.size() / 2];
    CHECK(median > true_ls / 2.0);
    CHECK(median < true_ls * 2.0);
}

TEST_CASE("gp fit is deterministic and tolerates duplicates and flat targets") {
    const auto space = unit_space(2);
    ObservationPool pool;
    Rng rng(8);
    for (int i = 0; i < 12; ++i) {
        Vec x(2);
        x << rng.uniform(), rng.uniform();
        pool.add(x, x.sum());
    }
    GpTrainConfig cfg;
    const GpModel a = GpModel::fit(pool, space, KernelFamily::Matern52, cfg, 3);
    const GpModel b = GpModel::fit(pool, space, KernelFamily::Matern52, cfg, 3);
    CHECK(a.kernel().signal_var == b.kernel().signal_var);
    CHECK((a.kernel().lengthscales - b.kernel().lengthscales).norm() == 0.0);

    // duplicate observation barely moves predictions
    Vec probe(2);
    probe << 0.4, 0.6;
    const auto before = a.posterior(probe);
    ObservationPool pool2 = pool;
    pool2.add(pool[0].theta, pool[0].value);
    const GpModel c = GpModel::condition(pool2, space, a.kernel());
    const auto after = c.posterior(probe);
    CHECK(after.mean == doctest::Approx(before.mean).epsilon(1e-3));

    // identical targets: fit falls back to a flat surrogate without throwing
    ObservationPool flat;
    for (int i = 0; i < 5; ++i) flat.add(Vec::Constant(2, 0.1 * (i + 1)), 3.25);
    const GpModel f = GpModel::fit(flat, space, KernelFamily::Matern52, cfg, 4);
    const auto post = f.posterior(probe);
    CHECK(post.mean == doctest::Approx(3.25).epsilon(1e-6));

    CHECK_THROWS_AS(GpModel::fit(ObservationPool{}, space, KernelFamily::Matern52, cfg, 1),
                    ConfigError);
}

TEST_CASE("posterior variance never exceeds the prior variance") {
    const auto space = unit_space(2);
    ObservationPool pool;
    Rng rng(12);
    for (int i = 0; i < 20; ++i) {
        Vec x(2);
        x << rng.uniform(), rng.uniform();
        pool.add(x, rng.normal());
    }
    // target scale of the pool, to convert the posterior sd back to
    // standardized units
    double mean = 0.0;
    for (size_t i = 0; i < pool.size(); ++i) mean += pool[i].value;
    mean /= static_cast<double>(pool.size());
    double y_sd = 0.0;
    for (size_t i = 0; i < pool.size(); ++i)
        y_sd += (pool[i].value - mean) * (pool[i].value - mean);
    y_sd = std::sqrt(y_sd / static_cast<double>(pool.size()));

    GpTrainConfig cfg;
    const GpModel gp = GpModel::fit(pool, space, KernelFamily::Matern52, cfg, 9);
    const double prior_sd = std::sqrt(gp.kernel().signal_var);
    for (int i = 0; i < 50; ++i) {
        Vec u(2);
        u << rng.uniform(), rng.uniform();
        const auto post = gp.posterior(u);
        CHECK(post.sd >= 0.0);
        CHECK(post.sd / y_sd <= prior_sd + 1e-10);
    }
}

TEST_CASE("conditioning on more data never increases posterior sd") {
    const auto space = unit_space(2);
    Rng rng(14);
    ObservationPool pool;
    for (int i = 0; i < 10; ++i) {
        Vec x(2);
        x << rng.uniform(), rng.uniform();
        pool.add(x, std::cos(4.0 * x[0]) + x[1]);
    }
    KernelSpec kern;
    kern.family = KernelFamily::Matern52;
    kern.signal_var = 1.0;
    kern.lengthscales = Vec::Constant(2, 0.4);
    kern.noise_var = 1e-6;

    std::vector<Vec> probes;
    for (int i = 0; i < 20; ++i) {
        Vec u(2);
        u << rng.uniform(), rng.uniform();
        probes.push_back(u);
    }
    const GpModel before = GpModel::condition(pool, space, kern);
    // add an observation whose value equals an existing one, so the target
    // mean/scale stay effectively fixed and the sd comparison is direct
    ObservationPool bigger = pool;
    Vec extra(2);
    extra << rng.uniform(), rng.uniform();
    bigger.add(extra, pool[0].value);
    const GpModel after = GpModel::condition(bigger, space, kern);
    for (const auto& u : probes) {
        const double sd_b = before.posterior(u).sd;
        const double sd_a = after.posterior(u).sd;
        CHECK(sd_a <= sd_b * 1.05 + 1e-8);
    }
}

TEST_CASE("expected improvement closed form") {
    const auto space = unit_space(1);
    ObservationPool pool;
    pool.add(Vec::Constant(1, 0.2), 0.0);
    pool.add(Vec::Constant(1, 0.8), 1.0);
    KernelSpec kern;
    kern.family = KernelFamily::SquaredExponential;
    kern.signal_var = 1.0;
    kern.lengthscales = Vec::Constant(1, 0.2);
    kern.noise_var = 1e-8;
    const GpModel gp = GpModel::condition(pool, space, kern);

    SUBCASE("EI is non-negative everywhere and ~0 at the incumbent") {
        for (double u = 0.0; u <= 1.0; u += 0.01)
            CHECK(expected_improvement(gp, Vec::Constant(1, u), pool.best_value()) >= 0.0);
        CHECK(expected_improvement(gp, Vec::Constant(1, 0.8), pool.best_value()) <
              1e-3);
    }
    SUBCASE("EI at mu = L*, sd = 1 equals phi(0) via Monte Carlo") {
        // direct formula check, decoupled from the GP: z = 0
        // EI = sd * phi(0)
        Rng rng(100);
        const int n = 1000000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += std::max(rng.normal(), 0.0);
        acc /= n;
        CHECK(acc == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(0.01));
    }
}

TEST_CASE("acquisition maximizer dominates random probes and is seeded") {
    const auto space = unit_space(2);
    ObservationPool pool;
    pool.add((Vec(2) << 0.5, 0.5).finished(), 1.0);
    pool.add((Vec(2) << 0.1, 0.9).finished(), 0.2);
    pool.add((Vec(2) << 0.9, 0.1).finished(), 0.4);
    KernelSpec kern;
    kern.family = KernelFamily::Matern52;
    kern.signal_var = 1.0;
    kern.lengthscales = Vec::Constant(2, 0.3);
    kern.noise_var = 1e-6;
    const GpModel gp = GpModel::condition(pool, space, kern);

    AcqConfig acq;
    const Vec best = maximize_acquisition(gp, space, acq, pool.best_value(), 77);
    const Vec best2 = maximize_acquisition(gp, space, acq, pool.best_value(), 77);
    CHECK((best - best2).norm() == 0.0);

    const double ei_best =
        expected_improvement(gp, space.to_unit(best), pool.best_value());
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        Vec u(2);
        u << rng.uniform(), rng.uniform();
        CHECK(ei_best >= expected_improvement(gp, u, pool.best_value()) - 1e-12);
    }
}

TEST_SUITE_END();
