#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "aqibench/metrics.hpp"
#include "aqibench/rng.hpp"

using namespace aqibench;

TEST_CASE("metrics on a tiny hand-worked example") {
    const std::vector<double> truth = {1.0, 2.0, 3.0, 4.0};
    const std::vector<double> pred = {1.5, 2.0, 2.0, 5.0};
    // abs errors: 0.5, 0, 1, 1 -> mae 0.625
    CHECK(mae(truth, pred) == Catch::Approx(0.625));
    // sq errors: 0.25, 0, 1, 1 -> mse 0.5625
    CHECK(mse(truth, pred) == Catch::Approx(0.5625));
    CHECK(rmse(truth, pred) == Catch::Approx(std::sqrt(0.5625)));
    // population variance of truth: mean 2.5, var 1.25 -> nmse = 0.45
    CHECK(nmse(truth, pred) == Catch::Approx(0.45));
    CHECK(r2(truth, pred) == Catch::Approx(0.55));
}

TEST_CASE("perfect predictions give zero error and r2 of one") {
    const std::vector<double> v = {3.0, 1.0, 4.0, 1.0, 5.0};
    CHECK(mae(v, v) == 0.0);
    CHECK(mse(v, v) == 0.0);
    CHECK(nmse(v, v) == 0.0);
    CHECK(r2(v, v) == 1.0);
}

TEST_CASE("predicting the mean gives nmse of exactly one") {
    const std::vector<double> truth = {1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> mean_pred(truth.size(), 3.0);
    CHECK(nmse(truth, mean_pred) == Catch::Approx(1.0));
    CHECK(r2(truth, mean_pred) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("identities rmse^2 == mse and r2 == 1 - nmse hold on random data") {
    Rng rng(99);
    std::vector<double> truth, pred;
    for (int i = 0; i < 500; ++i) {
        truth.push_back(10.0 * rng.normal() + 50.0);
        pred.push_back(10.0 * rng.normal() + 50.0);
    }
    const auto m = compute_metrics(truth, pred);
    CHECK(m.rmse * m.rmse == Catch::Approx(m.mse).epsilon(1e-12));
    CHECK(m.r2 == 1.0 - m.nmse);  // defined identically, must be exact
    CHECK(m.mae <= m.rmse + 1e-12);  // Jensen: mean |e| <= sqrt(mean e^2)
}

TEST_CASE("metric edge cases throw") {
    CHECK_THROWS_AS(mae({}, {}), ValidationError);
    CHECK_THROWS_AS(mae({1.0}, {1.0, 2.0}), ValidationError);
    // zero-variance truth makes nmse undefined
    CHECK_THROWS_AS(nmse({2.0, 2.0, 2.0}, {1.0, 2.0, 3.0}), ValidationError);
}
