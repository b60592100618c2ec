#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ssmid/csv.hpp"
#include "ssmid/linalg.hpp"
#include "ssmid/model.hpp"
#include "ssmid/ocv.hpp"
#include "ssmid/rk4.hpp"
#include "ssmid/rng.hpp"
#include "ssmid/sampling.hpp"
#include "ssmid/simulate.hpp"

using namespace ssmid;

namespace {

Model half_decay_model() {
    Model m;
    m.state_dim = 1;
    m.input_dim = 1;
    m.meas_dim = 1;
    m.transition = [](const Vec& x, const Vec&, const Vec&) { return Vec(0.5 * x); };
    m.measurement = [](const Vec& x, const Vec&, const Vec&) { return x; };
    return m;
}

} // namespace

TEST_SUITE_BEGIN("core");

TEST_CASE("rng is reproducible and splits into independent streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    Rng s1 = Rng(7).split(1), s2 = Rng(7).split(2);
    bool differ = false;
    for (int i = 0; i < 10; ++i) differ |= (s1.uniform() != s2.uniform());
    CHECK(differ);
}

TEST_CASE("rng normal moments") {
    Rng rng(3);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("logsumexp handles -inf and large offsets") {
    std::vector<double> v{kNegInf, kNegInf};
    CHECK(logsumexp(v) == kNegInf);
    std::vector<double> w{1000.0, 1000.0};
    CHECK(logsumexp(w) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("jittered_llt recovers from semidefinite input") {
    Mat p = Mat::Zero(2, 2); // PSD but singular
    const auto llt = jittered_llt(p);
    CHECK(llt.info() == Eigen::Success);
    Mat bad = -Mat::Identity(2, 2);
    CHECK_THROWS_AS(jittered_llt(bad), DegeneracyError);
}

TEST_CASE("log_mvn_pdf matches the scalar normal density") {
    Vec x(1), m(1);
    x << 0.3;
    m << 0.1;
    Mat s(1, 1);
    s << 0.25;
    const double expected =
        -0.5 * (0.04 / 0.25 + std::log(0.25) + std::log(2.0 * M_PI));
    CHECK(log_mvn_pdf(x, m, s) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rk4 zero dynamics leaves the state unchanged") {
    auto zero = [](const Vec& x, const Vec&, const Vec&) { return Vec(Vec::Zero(x.size())); };
    Vec x(3);
    x << 1.0, -2.0, 0.5;
    const Vec next = rk4_step(zero, x, Vec(), Vec(), 0.1);
    CHECK((next - x).norm() == 0.0);
}

TEST_CASE("rk4 matches the exponential solution") {
    auto decay = [](const Vec& x, const Vec&, const Vec&) { return Vec(-x); };
    Vec x = Vec::Ones(1);
    const Vec next = rk4_step(decay, x, Vec(), Vec(), 0.1);
    CHECK(next[0] == doctest::Approx(std::exp(-0.1)).epsilon(1e-7));
}

TEST_CASE("rk4 empirical order is ~4 on dx/dt = -x") {
    auto decay = [](const Vec& x, const Vec&, const Vec&) { return Vec(-x); };
    auto integrate = [&](double dt) {
        Vec x = Vec::Ones(1);
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < steps; ++i) x = rk4_step(decay, x, Vec(), Vec(), dt);
        return std::abs(x[0] - std::exp(-1.0));
    };
    const double e1 = integrate(0.1);
    const double e2 = integrate(0.05);
    const double ratio = e1 / e2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
    const double order = std::log2(ratio);
    CHECK(order > 3.8);
    CHECK(order < 4.2);
}

TEST_CASE("rk4 flags non-finite derivatives with the component index") {
    auto bad = [](const Vec& x, const Vec&, const Vec&) {
        Vec d = Vec::Zero(x.size());
        d[1] = std::numeric_limits<double>::quiet_NaN();
        return d;
    };
    Vec x = Vec::Zero(3);
    CHECK_THROWS_AS(rk4_step(bad, x, Vec(), Vec(), 0.1), NonFiniteError);
    try {
        rk4_step(bad, x, Vec(), Vec(), 0.1);
    } catch (const NonFiniteError& e) {
        CHECK(e.index == 1);
    }
}

TEST_CASE("simulate: linear half-decay recursion") {
    const Model m = half_decay_model();
    Mat inputs = Mat::Zero(3, 1);
    const auto res = simulate(m, Vec::Ones(1), inputs, Vec(), nullptr, 0);
    CHECK(res.states(0, 0) == doctest::Approx(0.5));
    CHECK(res.states(1, 0) == doctest::Approx(0.25));
    CHECK(res.states(2, 0) == doctest::Approx(0.125));
    CHECK((res.measurements - res.states).norm() == 0.0);
}

TEST_CASE("simulate: seeded noise is bit-identical across runs") {
    const Model m = half_decay_model();
    Mat inputs = Mat::Zero(50, 1);
    const NoiseSpec ns = NoiseSpec::isotropic(1, 0.01, 1, 0.04);
    const auto a = simulate(m, Vec::Ones(1), inputs, Vec(), &ns, 99);
    const auto b = simulate(m, Vec::Ones(1), inputs, Vec(), &ns, 99);
    CHECK((a.states - b.states).norm() == 0.0);
    CHECK((a.measurements - b.measurements).norm() == 0.0);
    const auto c = simulate(m, Vec::Ones(1), inputs, Vec(), &ns, 100);
    CHECK((a.measurements - c.measurements).norm() > 0.0);
}

TEST_CASE("simulate: noiseless run composed with measurement is exact") {
    const Model m = half_decay_model();
    Mat inputs = Mat::Zero(10, 1);
    const auto res = simulate(m, Vec::Ones(1), inputs, Vec(), nullptr, 0);
    for (Eigen::Index k = 0; k < 10; ++k) {
        const Vec x = res.states.row(k).transpose();
        const Vec z = m.measurement(x, inputs.row(k).transpose(), Vec());
        CHECK(res.measurements(k, 0) == z[0]);
    }
}

TEST_CASE("parameter space normalization round-trips and clamps") {
    Vec lo(2), hi(2);
    lo << -1.0, 2.0;
    hi << 1.0, 6.0;
    const ParameterSpace space({"p", "q"}, lo, hi);
    Vec theta(2);
    theta << 0.5, 3.0;
    CHECK((space.from_unit(space.to_unit(theta)) - theta).norm() < 1e-14);
    Vec wild(2);
    wild << 5.0, -10.0;
    const Vec clamped = space.clamp(wild);
    CHECK(clamped[0] == 1.0);
    CHECK(clamped[1] == 2.0);
    CHECK_THROWS_AS(ParameterSpace({"x"}, Vec::Ones(1), Vec::Ones(1)), ConfigError);
}

TEST_CASE("latin hypercube stratification") {
    Rng rng(5);
    const int n = 16;
    const Mat s = latin_hypercube(n, 3, rng);
    for (int d = 0; d < 3; ++d) {
        std::vector<bool> hit(n, false);
        for (int i = 0; i < n; ++i) {
            const int stratum = static_cast<int>(s(i, d) * n);
            REQUIRE(stratum >= 0);
            REQUIRE(stratum < n);
            CHECK(!hit[static_cast<size_t>(stratum)]);
            hit[static_cast<size_t>(stratum)] = true;
        }
    }
}

TEST_CASE("halton shift is seeded and in the unit cube") {
    Rng r1(9), r2(9), r3(10);
    const Mat a = halton_shifted(20, 4, r1);
    const Mat b = halton_shifted(20, 4, r2);
    const Mat c = halton_shifted(20, 4, r3);
    CHECK((a - b).norm() == 0.0);
    CHECK((a - c).norm() > 0.0);
    CHECK((a.array() >= 0.0).all());
    CHECK((a.array() < 1.0).all());
}

TEST_CASE("ocv curve is monotone and hits its endpoints") {
    const OcvCurve ocv = OcvCurve::synthetic_default();
    CHECK(ocv(0.0) == doctest::Approx(2.5));
    CHECK(ocv(1.0) == doctest::Approx(4.2));
    double prev = ocv(0.0);
    for (int i = 1; i <= 200; ++i) {
        const double v = ocv(i / 200.0);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    // clamped outside [0, 1]
    CHECK(ocv(-0.5) == ocv(0.0));
    CHECK(ocv(1.5) == ocv(1.0));
    CHECK_THROWS_AS(OcvCurve({{0.0, 3.0}, {0.5, 2.0}, {1.0, 4.0}}), ConfigError);
}

TEST_CASE("dataset csv round-trip is byte-stable") {
    Dataset ds;
    ds.dt = 1.0;
    ds.label = "roundtrip";
    ds.inputs.resize(4, 2);
    ds.inputs << -7.5, 303.0, -7.5, 303.0, -3.25, 303.0, 0.0, 303.0;
    ds.measurements.resize(4, 2);
    ds.measurements << 4.19, 303.0, 4.17, 303.1, 4.1612345678901234, 303.05, 4.15, 303.0;

    const auto dir = std::filesystem::temp_directory_path() / "ssmid_csv_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "ds.csv";
    write_dataset_csv(path, ds, battx_input_names(), battx_meas_names());
    const Dataset back = read_dataset_csv(path);
    CHECK(back.dt == ds.dt);
    CHECK((back.inputs - ds.inputs).norm() == 0.0);
    CHECK((back.measurements - ds.measurements).norm() == 0.0);

    const auto path2 = dir / "ds2.csv";
    write_dataset_csv(path2, back, battx_input_names(), battx_meas_names());
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
}

TEST_CASE("generic csv header and malformed input rejection") {
    Dataset ds;
    ds.dt = 0.5;
    ds.label = "gen";
    ds.inputs = Mat::Random(3, 1);
    ds.measurements = Mat::Random(3, 2);
    const auto dir = std::filesystem::temp_directory_path() / "ssmid_csv_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "gen.csv";
    write_dataset_csv(path, ds);
    const Dataset back = read_dataset_csv(path);
    CHECK(back.input_dim() == 1);
    CHECK(back.meas_dim() == 2);
    CHECK((back.inputs - ds.inputs).norm() == 0.0);

    const auto bad = dir / "bad.csv";
    std::ofstream f(bad);
    f << "t,u1,z1\n1.0,0.1,0.2\n2.0,0.1,0.2\n3.5,0.1,0.2\n"; // non-uniform spacing
    f.close();
    CHECK_THROWS_AS(read_dataset_csv(bad), ConfigError);
}

TEST_SUITE_END();
