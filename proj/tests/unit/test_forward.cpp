#include "fbsde/declarative.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/parallel.hpp"
#include "fbsde/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace fbsde;

namespace {

ProblemSpec constant_coupling(int d, int d1, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    DeclarativeProblem p;
    p.d = d;
    p.d1 = d1;
    p.a = constant_field(Vec::Zero(d));
    p.A = constant_field(Mat::Identity(d, d));
    Mat c(d1, d1), C(d1, d * d1);
    for (auto& v : c.reshaped()) v = u(rng);
    for (auto& v : C.reshaped()) v = u(rng);
    p.c = constant_field(c);
    p.C = constant_field(C);
    p.u0.assign(d1, {TerminalTerm{}});
    return build_problem(p);
}

SolverConfig small(int N, std::int64_t M, std::uint64_t seed = 5) {
    SolverConfig c;
    c.N = N;
    c.M = M;
    c.seed = seed;
    return c;
}

} // namespace

TEST_SUITE("rng") {

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using P = Philox4x32;
    CHECK(P::apply({0, 0, 0, 0}, {0, 0}) ==
          P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(P::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                   {0xffffffffu, 0xffffffffu}) ==
          P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(P::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                   {0xa4093822u, 0x299f31d0u}) ==
          P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal stream moments") {
    const NormalStream s(42);
    double sum = 0, sq = 0, cross = 0;
    const int n = 200000;
    double pair[2];
    for (int i = 0; i < n; ++i) {
        s.fill(static_cast<std::uint64_t>(i), 3, pair, 2);
        sum += pair[0] + pair[1];
        sq += pair[0] * pair[0] + pair[1] * pair[1];
        cross += pair[0] * pair[1];
    }
    CHECK(std::abs(sum / (2.0 * n)) < 0.01);
    CHECK(sq / (2.0 * n) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(cross / n) < 0.01);
}

TEST_CASE("normal stream is keyed, not sequential") {
    const NormalStream s(7);
    double a[3], b[3], c[3];
    s.fill(10, 4, a, 3);
    s.fill(11, 4, c, 3);
    s.fill(10, 4, b, 3);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
    CHECK(a[0] != c[0]);
    double longer[5];
    s.fill(10, 4, longer, 5);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == longer[i]);
}

} // TEST_SUITE

TEST_SUITE("forward") {

TEST_CASE("time grid") {
    const TimeGrid g(0.25, 1.0, 3);
    CHECK(g.dt() == doctest::Approx(0.25));
    CHECK(g.t(3) == 1.0);
    CHECK(g.points().size() == 4);
    CHECK_THROWS(TimeGrid(1.0, 1.0, 4));
    CHECK_THROWS(TimeGrid(0.0, 1.0, 0));
}

TEST_CASE("frozen diffusion keeps the state at x") {
    DeclarativeProblem p = declarative_catalog("heat-1d");
    p.d = 2;
    p.a = constant_field(Vec::Zero(2));
    p.A = constant_field(Mat::Zero(2, 2));
    p.C = zero_field(1, 2);
    p.u0 = {{TerminalTerm{}}};
    const auto spec = build_problem(p);
    const Vec x(Eigen::Vector2d(0.3, -1.2));
    const auto paths = simulate_forward(spec, 0.0, x, small(10, 50));
    for (std::int64_t m = 0; m < paths.M; ++m) {
        for (int k = 0; k <= 10; ++k) CHECK(paths.xi_at(m, k) == x);
    }
}

TEST_CASE("trivial functional is the identity") {
    const auto spec = catalog("heat-1d");
    const auto paths = simulate_forward(spec, 0.0, Vec::Zero(1), small(20, 30));
    for (std::int64_t m = 0; m < paths.M; ++m) {
        for (int k = 0; k <= 20; ++k) {
            CHECK(paths.gamma_at(m, k)(0, 0) == 1.0);
            CHECK(paths.gamma_inv_at(m, k)(0, 0) == 1.0);
        }
    }
    CHECK(gamma_compose_check(spec, paths, 0, 7, 20) == 0.0);
    CHECK(gamma_inverse_check(paths) == 0.0);
}

TEST_CASE("rotation functional approaches the matrix exponential") {
    const auto spec = catalog("rotation-coupling");
    const double theta = std::numbers::pi / 2;
    const auto paths = simulate_forward(spec, 0.0, Vec::Zero(1), small(200, 4));
    const Mat exact = oracle::expm(spec.c(0, Vec::Zero(1)) * theta);
    for (std::int64_t m = 0; m < paths.M; ++m) {
        CHECK((paths.gamma_at(m, 200) - exact).lpNorm<Eigen::Infinity>() <= 0.05);
    }
    CHECK(exact(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("composition property") {
    const auto spec = constant_coupling(1, 2, 13, 0.8);
    const auto paths = simulate_forward(spec, 0.0, Vec::Zero(1), small(50, 200));
    CHECK(gamma_compose_check(spec, paths, 4, 4, 4) == 0.0);
    CHECK(gamma_compose_check(spec, paths, 0, 17, 50) <= 1e-12);
    CHECK(gamma_compose_check(spec, paths, 5, 30, 31) <= 1e-12);
    CHECK_THROWS(gamma_compose_check(spec, paths, 3, 2, 4));
}

TEST_CASE("scalar inverse is exact to roundoff") {
    const auto spec = constant_coupling(1, 1, 3, 0.5);
    const auto paths = simulate_forward(spec, 0.0, Vec::Zero(1), small(40, 300));
    CHECK(gamma_inverse_check(paths) <= 1e-12);
}

TEST_CASE("three-dimensional functional inverse") {
    const auto spec = constant_coupling(1, 3, 21, 0.6);
    const auto paths = simulate_forward(spec, 0.0, Vec::Zero(1), small(100, 1000));
    CHECK(gamma_inverse_check(paths) <= 1e-10);

    // Independent solve of Gamma X = I at a few (path, step) pairs.
    for (std::int64_t m : {0, 499, 999}) {
        for (int k : {1, 50, 100}) {
            const Mat G = paths.gamma_at(m, k);
            const Mat X = G.fullPivHouseholderQr().solve(Mat::Identity(3, 3));
            CHECK((X - paths.gamma_inv_at(m, k)).lpNorm<Eigen::Infinity>() <=
                  1e-10 * (1.0 + X.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("singular step factor raises with location") {
    DeclarativeProblem p = declarative_catalog("heat-1d");
    p.c = constant_field(Mat::Constant(1, 1, -10.0));
    const auto spec = build_problem(p);
    // F = 1 - 10 dt vanishes at dt = 0.1.
    CHECK_THROWS_WITH_AS(simulate_forward(spec, 0.0, Vec::Zero(1), small(10, 4)),
                         doctest::Contains("step"), SimulationError);
}

TEST_CASE("simulation is deterministic and worker-count independent") {
    const auto spec = constant_coupling(2, 2, 8, 0.4);
    const Vec x(Eigen::Vector2d(0.1, 0.2));
    const auto cfg = small(12, 5000, 99);
    set_thread_count(1);
    const auto a = simulate_forward(spec, 0.0, x, cfg);
    set_thread_count(4);
    const auto b = simulate_forward(spec, 0.0, x, cfg);
    set_thread_count(1);
    CHECK(a.increments == b.increments);
    CHECK(a.xi == b.xi);
    CHECK(a.gamma == b.gamma);
    CHECK(a.gamma_inv == b.gamma_inv);

    // Path m does not depend on M.
    auto fewer = cfg;
    fewer.M = 100;
    const auto c = simulate_forward(spec, 0.0, x, fewer);
    CHECK(std::equal(c.xi.begin(), c.xi.end(), a.xi.begin()));
}

TEST_CASE("increments have the Brownian law") {
    const auto spec = catalog("heat-1d");
    const auto paths = simulate_forward(spec, 0.0, Vec::Zero(1), small(8, 20000));
    const double dt = paths.grid.dt();
    double sum = 0, sq = 0;
    for (double v : paths.increments) {
        sum += v;
        sq += v * v;
    }
    const double n = static_cast<double>(paths.increments.size());
    CHECK(std::abs(sum / n) <= 4.0 * std::sqrt(dt / n));
    CHECK(sq / n == doctest::Approx(dt).epsilon(0.03));
}

TEST_CASE("Euler weak accuracy for an Ornstein-Uhlenbeck state") {
    DeclarativeProblem p = declarative_catalog("heat-1d");
    p.a = AffineField{Mat::Zero(1, 1), {Mat::Constant(1, 1, -1.0)}};
    const auto spec = build_problem(p);
    const auto paths = simulate_forward(spec, 0.0, Vec::Constant(1, 1.0), small(100, 20000));
    std::vector<double> terminal;
    for (std::int64_t m = 0; m < paths.M; ++m) terminal.push_back(paths.xi_at(m, 100)[0]);
    const auto mom = oracle::moments(terminal);
    CHECK(std::abs(mom.mean - std::exp(-1.0)) <= 3.0 * mom.std_error + 0.01);
}

TEST_CASE("paths dump round-trips") {
    const auto spec = constant_coupling(1, 2, 2, 0.3);
    const auto paths = simulate_forward(spec, 0.1, Vec::Constant(1, 0.5), small(6, 9));
    std::stringstream buf;
    write_paths(paths, buf);
    const auto back = read_paths(buf);
    CHECK(back.d == paths.d);
    CHECK(back.d1 == paths.d1);
    CHECK(back.M == paths.M);
    CHECK(back.grid.N == paths.grid.N);
    CHECK(back.grid.s == paths.grid.s);
    CHECK(back.seed == paths.seed);
    CHECK(back.increments == paths.increments);
    CHECK(back.xi == paths.xi);
    CHECK(back.gamma == paths.gamma);
    CHECK(back.gamma_inv == paths.gamma_inv);
}

} // TEST_SUITE
