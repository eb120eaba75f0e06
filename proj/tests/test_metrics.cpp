#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "rcv/errors.hpp"
#include "rcv/metrics.hpp"
#include "rcv/rng.hpp"

using namespace rcv;

TEST_CASE("rmse_per_step on hand-checked cases") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 3);
    CHECK(rmse_per_step(a, a).norm() == 0.0);

    Eigen::MatrixXd b = Eigen::MatrixXd::Ones(4, 3);
    Eigen::VectorXd r = rmse_per_step(a, b);
    REQUIRE(r.size() == 3);
    for (int t = 0; t < 3; ++t) CHECK(r(t) == doctest::Approx(1.0).epsilon(1e-15));

    Eigen::MatrixXd t1(2, 1), p1(2, 1);
    t1 << 0, 0;
    p1 << 3, 4;
    CHECK(rmse_per_step(t1, p1)(0) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));

    Eigen::MatrixXd wrong(3, 3);
    CHECK_THROWS_AS(rmse_per_step(a, wrong), UsageError);
}

TEST_CASE("rmse_per_step is a metric per step and scales homogeneously") {
    Rng rng(19);
    Eigen::MatrixXd a(5, 20), b(5, 20), c(5, 20);
    for (long j = 0; j < 20; ++j)
        for (long i = 0; i < 5; ++i) {
            a(i, j) = rng.normal();
            b(i, j) = rng.normal();
            c(i, j) = rng.normal();
        }
    Eigen::VectorXd ab = rmse_per_step(a, b);
    Eigen::VectorXd ba = rmse_per_step(b, a);
    Eigen::VectorXd ac = rmse_per_step(a, c);
    Eigen::VectorXd cb = rmse_per_step(c, b);
    CHECK((ab - ba).norm() == 0.0);
    for (long t = 0; t < 20; ++t) CHECK(ab(t) <= ac(t) + cb(t) + 1e-14);

    Eigen::VectorXd scaled = rmse_per_step(2.5 * a, 2.5 * b);
    CHECK((scaled - 2.5 * ab).norm() <= 1e-13 * ab.norm());
}

TEST_CASE("series-level rmse carries dt and rejects mismatches") {
    FieldSeries t, p;
    t.data = Eigen::MatrixXd::Zero(2, 4);
    p.data = Eigen::MatrixXd::Ones(2, 4);
    t.dt = p.dt = 0.25;
    ErrorTrace tr = rmse_per_step(t, p);
    CHECK(tr.dt == 0.25);
    CHECK(tr.rmse.size() == 4);
    CHECK(tr.diverged_at == -1);

    p.dt = 0.5;
    CHECK_THROWS_AS(rmse_per_step(t, p), UsageError);
    p.dt = 0.25;
    p.encoding = Encoding::Magnitude;
    CHECK_THROWS_AS(rmse_per_step(t, p), UsageError);
}

TEST_CASE("divergence sentinel and trace capping") {
    Eigen::MatrixXd truth(1, 2);
    truth << 3, 4;  // RMS = sqrt(12.5)
    const double sentinel = divergence_sentinel(truth);
    CHECK(sentinel == doctest::Approx(10.0 * std::sqrt(12.5)).epsilon(1e-15));

    ErrorTrace tr;
    tr.rmse.resize(3);
    tr.rmse << 0.1, 2.0 * sentinel, 0.2;
    cap_trace(tr, 5, sentinel);
    REQUIRE(tr.rmse.size() == 5);
    CHECK(tr.rmse(0) == 0.1);
    CHECK(tr.rmse(1) == sentinel);  // capped
    CHECK(tr.rmse(2) == 0.2);
    CHECK(tr.rmse(3) == sentinel);  // padded
    CHECK(tr.rmse(4) == sentinel);

    // capping to a shorter horizon truncates
    cap_trace(tr, 2, sentinel);
    CHECK(tr.rmse.size() == 2);
    CHECK(tr.rmse(0) == 0.1);

    CHECK_THROWS_AS(divergence_sentinel(Eigen::MatrixXd()), UsageError);
}

TEST_CASE("ensemble statistics: mean and population std") {
    ErrorTrace a, b;
    a.rmse = Eigen::VectorXd::Constant(4, 0.0);
    b.rmse = Eigen::VectorXd::Constant(4, 2.0);
    auto [mean, sd] = ensemble_stats({a, b});
    for (int t = 0; t < 4; ++t) {
        CHECK(mean(t) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(sd(t) == doctest::Approx(1.0).epsilon(1e-15));  // population, not n-1
    }

    auto [m1, s1] = ensemble_stats({a});
    CHECK(m1.norm() == 0.0);
    CHECK(s1.norm() == 0.0);  // single trace: zero spread

    ErrorTrace ragged;
    ragged.rmse = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(ensemble_stats({a, ragged}), UsageError);
    CHECK_THROWS_AS(ensemble_stats({}), UsageError);
}

TEST_CASE("valley detection on a V-shaped score profile") {
    ErrorSurface s;
    s.rho_grid.resize(5);
    s.rho_grid << 0.5, 1.0, 1.5, 2.0, 2.5;
    s.mean.resize(5, 10);
    const double level[5] = {5.0, 1.0, 0.2, 1.0, 5.0};
    for (int r = 0; r < 5; ++r) s.mean.row(r).setConstant(level[r]);
    s.stddev = Eigen::MatrixXd::Zero(5, 10);

    ValleyReport v = detect_valley(s, 1.5, 10);
    REQUIRE(!v.empty);
    CHECK(v.rho_lo == 1.0);
    CHECK(v.rho_hi == 2.0);
    CHECK(v.best_rho == 1.5);
    CHECK(v.best_score == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(v.score.size() == 5);

    // tighter threshold shrinks the valley to the minimum alone
    ValleyReport tight = detect_valley(s, 0.5, 10);
    REQUIRE(!tight.empty);
    CHECK(tight.rho_lo == 1.5);
    CHECK(tight.rho_hi == 1.5);

    // threshold below every score: no valley, but the argmin is still reported
    ValleyReport none = detect_valley(s, 0.1, 10);
    CHECK(none.empty);
    CHECK(none.best_rho == 1.5);

    // a zero surface is one big valley
    ErrorSurface zs = s;
    zs.mean.setZero();
    ValleyReport full = detect_valley(zs, 0.5, 10);
    REQUIRE(!full.empty);
    CHECK(full.rho_lo == 0.5);
    CHECK(full.rho_hi == 2.5);

    // monotonicity: widening the threshold never narrows the valley
    double prev_width = -1.0;
    for (double th : {0.25, 1.5, 6.0}) {
        ValleyReport w = detect_valley(s, th, 10);
        REQUIRE(!w.empty);
        CHECK(w.rho_hi - w.rho_lo >= prev_width);
        prev_width = w.rho_hi - w.rho_lo;
    }

    CHECK_THROWS_AS(detect_valley(s, 1.0, 0), UsageError);
    CHECK_THROWS_AS(detect_valley(s, 1.0, 11), UsageError);
}

TEST_CASE("valley scoring horizon uses only the leading steps") {
    ErrorSurface s;
    s.rho_grid.resize(2);
    s.rho_grid << 1.0, 2.0;
    s.mean.resize(2, 6);
    // row 0 starts good and blows up late; row 1 is mediocre throughout
    s.mean.row(0) << 0.1, 0.1, 0.1, 9.0, 9.0, 9.0;
    s.mean.row(1) << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0;
    s.stddev = Eigen::MatrixXd::Zero(2, 6);

    CHECK(detect_valley(s, 0.5, 3).best_rho == 1.0);  // early window: rho=1 wins
    CHECK(detect_valley(s, 2.0, 6).best_rho == 2.0);  // full window: blowup counts
}

TEST_CASE("surface csv round-trips") {
    ErrorSurface s;
    s.rho_grid.resize(3);
    s.rho_grid << 0.1, 0.55, 1.0;
    s.mean.resize(3, 4);
    s.stddev.resize(3, 4);
    Rng rng(5);
    for (int r = 0; r < 3; ++r)
        for (int t = 0; t < 4; ++t) {
            s.mean(r, t) = rng.uniform();
            s.stddev(r, t) = rng.uniform() * 0.1;
        }
    s.dt = 0.25;
    s.lyapunov_max = 0.05;
    s.ensemble_size = 7;

    const std::string path = "test_surface_roundtrip.csv";
    write_surface_csv(s, path);
    ErrorSurface r = read_surface_csv(path);
    CHECK((r.rho_grid - s.rho_grid).norm() == 0.0);
    CHECK((r.mean - s.mean).norm() == 0.0);          // %.17g round-trips doubles
    CHECK((r.stddev - s.stddev).norm() == 0.0);
    CHECK(r.dt == s.dt);
    CHECK(r.lyapunov_max == doctest::Approx(s.lyapunov_max).epsilon(1e-12));
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_surface_csv("no_such_surface.csv"), UsageError);
}

TEST_CASE("valley report file format") {
    ValleyReport v;
    v.empty = false;
    v.rho_lo = 0.5;
    v.rho_hi = 1.25;
    v.best_rho = 1.0;
    v.best_score = 0.125;
    v.threshold = 0.5;
    v.horizon_steps = 40;
    v.score.resize(3);
    v.score << 0.5, 0.125, 1.5;
    const std::string path = "test_valley.txt";
    write_valley_txt(v, path);
    std::ifstream f(path);
    std::stringstream buf;
    buf << f.rdbuf();
    CHECK(buf.str() ==
          "empty = 0\n"
          "rho_lo = 0.5\n"
          "rho_hi = 1.25\n"
          "best_rho = 1\n"
          "best_score = 0.125\n"
          "threshold = 0.5\n"
          "horizon_steps = 40\n"
          "scores = 0.5,0.125,1.5\n");
    std::remove(path.c_str());
}

TEST_CASE("pgm heatmap bytes") {
    Eigen::MatrixXd m(2, 3);
    m << 0.0, 1.5, 3.0,
         4.5, 0.75, 2.25;
    const std::string path = "test_heatmap.pgm";
    write_pgm(m, path, 3.0);
    std::ifstream f(path);
    std::stringstream buf;
    buf << f.rdbuf();
    // values clip at the cutoff; gray = round(255 * v / 3)
    CHECK(buf.str() == "P2\n3 2\n255\n0 128 255\n255 64 191\n");
    std::remove(path.c_str());

    CHECK_THROWS_AS(write_pgm(m, path, 0.0), UsageError);
}

TEST_CASE("training_error measures the readout residual") {
    EsnModel m;
    m.hyper.output_dim = 1;
    m.readout = Eigen::MatrixXd::Ones(1, 2);  // sums the two state entries
    m.trained = true;
    Eigen::MatrixXd states(2, 2);
    states << 1, 2,
              3, 4;
    Eigen::MatrixXd targets(1, 2);
    targets << 4, 5;  // residuals: 0 and 1
    CHECK(training_error(m, states, targets) == doctest::Approx(0.5).epsilon(1e-15));

    EsnModel untrained;
    CHECK_THROWS_AS(training_error(untrained, states, targets), UsageError);
}
