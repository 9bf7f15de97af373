#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "jndbench/errors.hpp"
#include "jndbench/transform.hpp"
#include "test_support.hpp"

using namespace jndbench;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

}  // namespace

TEST_SUITE("transform") {

TEST_CASE("apply_logistic basics") {
    LogisticParams p{1.0, 5.0, 2.0, 0.7, 0.0, true};
    SUBCASE("midpoint at b3") {
        CHECK(apply_logistic(p, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
    }
    SUBCASE("degenerate constant map") {
        LogisticParams flat{4.2, 4.2, 0.0, 1.0, 0.0, true};
        for (double s : {-100.0, 0.0, 55.5}) CHECK(apply_logistic(flat, s) == 4.2);
    }
    SUBCASE("decreasing orientation midpoint") {
        LogisticParams q{0.0, 4.0, 30.0, -5.0, 0.0, true};
        CHECK(apply_logistic(q, 30.0) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("infinity maps to the matching asymptote") {
        CHECK(apply_logistic(p, kInf) == 1.0);   // b4 > 0: +inf -> b1
        CHECK(apply_logistic(p, -kInf) == 5.0);  // -inf -> b2
        LogisticParams q{0.0, 4.0, 30.0, -5.0, 0.0, true};
        CHECK(apply_logistic(q, kInf) == 4.0);   // b4 < 0: +inf -> b2
        CHECK(apply_logistic(q, -kInf) == 0.0);
    }
    SUBCASE("far tails saturate without overflow") {
        CHECK(apply_logistic(p, 1e6) == doctest::Approx(1.0));
        CHECK(apply_logistic(p, -1e6) == doctest::Approx(5.0));
    }
    SUBCASE("b4 = 0 evaluates as the step limit") {
        LogisticParams step{2.0, -2.0, 1.0, 0.0, 0.0, true};
        CHECK(apply_logistic(step, 1.5) == 2.0);
        CHECK(apply_logistic(step, 0.5) == -2.0);
        CHECK(apply_logistic(step, 1.0) == 0.0);
    }
}

TEST_CASE("strict monotonicity when b1 != b2") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        LogisticParams p;
        p.b1 = testsupport::uniform(rng, -3.0, 3.0);
        p.b2 = p.b1 + testsupport::uniform(rng, 0.5, 3.0);
        p.b3 = testsupport::uniform(rng, -2.0, 2.0);
        p.b4 = testsupport::uniform(rng, 0.05, 2.0) * (trial % 2 == 0 ? 1.0 : -1.0);
        double direction = (p.b4 > 0 ? 1.0 : -1.0) * (p.b1 - p.b2 > 0 ? 1.0 : -1.0);
        // Sample inside +-8 |b4| of the midpoint; far tails saturate to the
        // asymptote in double precision and successive steps underflow to 0.
        auto xs = linspace(p.b3 - 8.0 * std::fabs(p.b4), p.b3 + 8.0 * std::fabs(p.b4), 41);
        for (std::size_t i = 1; i < xs.size(); ++i) {
            double step = apply_logistic(p, xs[i]) - apply_logistic(p, xs[i - 1]);
            CHECK(step * direction > 0.0);
        }
    }
}

TEST_CASE("noiseless generate-and-refit recovery") {
    LogisticParams truth{0.0, 4.0, 0.5, 0.1, 0.0, true};
    auto xs = linspace(0.0, 1.0, 50);
    std::vector<double> ys;
    for (double x : xs) ys.push_back(apply_logistic(truth, x));

    auto fitted = fit_logistic(xs, ys);
    CHECK(fitted.fit_rmse < 1e-6);
    CHECK(fitted.converged);
    for (double x : xs)
        CHECK(std::fabs(apply_logistic(fitted, x) - apply_logistic(truth, x)) < 1e-3);

    SUBCASE("fit is deterministic") {
        auto again = fit_logistic(xs, ys);
        CHECK(again.b1 == fitted.b1);
        CHECK(again.b2 == fitted.b2);
        CHECK(again.b3 == fitted.b3);
        CHECK(again.b4 == fitted.b4);
    }
    SUBCASE("fit is invariant to point order") {
        std::vector<std::size_t> idx(xs.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(17);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::vector<double> xs2, ys2;
        for (auto i : idx) {
            xs2.push_back(xs[i]);
            ys2.push_back(ys[i]);
        }
        auto refit = fit_logistic(xs2, ys2);
        for (double x : xs)
            CHECK(apply_logistic(refit, x) ==
                  doctest::Approx(apply_logistic(fitted, x)).epsilon(1e-8));
    }
}

TEST_CASE("constant target accepted as flat map") {
    auto xs = linspace(10.0, 50.0, 12);
    std::vector<double> ys(xs.size(), 2.5);
    auto fitted = fit_logistic(xs, ys);
    CHECK(fitted.b1 == 2.5);
    CHECK(fitted.b2 == 2.5);
    CHECK(fitted.b4 != 0.0);
    CHECK(fitted.fit_rmse == 0.0);
    CHECK(fitted.converged);
}

TEST_CASE("fit preconditions") {
    SUBCASE("constant predictor") {
        std::vector<double> xs(10, 3.0);
        auto ys = linspace(0.0, 1.0, 10);
        CHECK_THROWS_AS(fit_logistic(xs, ys), ConstantPredictorError);
    }
    SUBCASE("too few points") {
        std::vector<double> xs{1, 2, 3, 4};
        std::vector<double> ys{1, 2, 3, 4};
        CHECK_THROWS_AS(fit_logistic(xs, ys), SampleTooSmallError);
    }
}

TEST_CASE("refit on own predictions is a fixed point") {
    std::mt19937_64 rng(23);
    auto xs = testsupport::random_vector(rng, 60, 20.0, 50.0);
    std::vector<double> ys;
    for (double x : xs) ys.push_back(2.0 + 1.7 / (1.0 + std::exp(-(x - 33.0) / 4.0)) +
                                     0.05 * testsupport::gaussian(rng));
    auto first = fit_logistic(xs, ys);
    std::vector<double> predictions;
    for (double x : xs) predictions.push_back(apply_logistic(first, x));
    auto second = fit_logistic(xs, predictions);
    CHECK(second.fit_rmse <= 1e-9);
}

TEST_CASE("noisy realistic fit converges") {
    std::mt19937_64 rng(41);
    auto xs = testsupport::random_vector(rng, 300, 25.0, 55.0);
    std::vector<double> ys;
    for (double x : xs)
        ys.push_back(4.0 - 4.0 / (1.0 + std::exp(-(x - 38.0) / -3.0)) +
                     0.1 * testsupport::gaussian(rng));
    auto fitted = fit_logistic(xs, ys);
    CHECK(fitted.converged);
    CHECK(fitted.fit_rmse < 0.2);
}

TEST_CASE("clamp replaces +inf by max finite plus IQR") {
    std::vector<double> scores{30.0, 34.0, 38.0, 42.0, kInf};
    auto clamped = clamp_infinite_scores(scores);
    // finite quartiles (linear interpolation): q25 = 33, q75 = 39, spread 6
    CHECK(clamped[4] == doctest::Approx(48.0).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) CHECK(clamped[i] == scores[i]);

    SUBCASE("no infinities is the identity") {
        std::vector<double> finite{1.0, 2.0, 3.0};
        CHECK(clamp_infinite_scores(finite) == finite);
    }
    SUBCASE("all infinite cannot be clamped") {
        std::vector<double> bad{kInf, kInf};
        CHECK_THROWS_AS(clamp_infinite_scores(bad), EvalError);
    }
}

TEST_CASE("joint fit") {
    auto xs = linspace(0.0, 1.0, 30);
    LogisticParams truth{0.2, 3.5, 0.4, 0.15, 0.0, true};
    PairedSeries a, b;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::string id = "st" + std::to_string(i);
        double y = apply_logistic(truth, xs[i]);
        a.stimulus_ids.push_back(id);
        a.scores.push_back(xs[i]);
        a.jnd_mean.push_back(y);
        a.jnd_std.push_back(0.1);
        b.stimulus_ids.push_back(id);
        b.scores.push_back(xs[i]);
        b.jnd_mean.push_back(y);
        b.jnd_std.push_back(0.1);
    }

    SUBCASE("identical variants reproduce the single fit") {
        auto joint = fit_logistic_joint(a, b);
        auto single = fit_logistic(a.scores, a.jnd_mean);
        for (double x : xs)
            CHECK(apply_logistic(joint, x) ==
                  doctest::Approx(apply_logistic(single, x)).epsilon(1e-9));
    }
    SUBCASE("joint residual beats grid perturbations on the concatenation") {
        std::mt19937_64 rng(9);
        for (std::size_t i = 0; i < b.scores.size(); ++i)
            b.scores[i] += 0.02 * testsupport::gaussian(rng);
        auto joint = fit_logistic_joint(a, b);
        std::vector<double> cat_x = a.scores, cat_y = a.jnd_mean;
        cat_x.insert(cat_x.end(), b.scores.begin(), b.scores.end());
        cat_y.insert(cat_y.end(), b.jnd_mean.begin(), b.jnd_mean.end());
        auto sse = [&](const LogisticParams& p) {
            double acc = 0.0;
            for (std::size_t i = 0; i < cat_x.size(); ++i) {
                double r = apply_logistic(p, cat_x[i]) - cat_y[i];
                acc += r * r;
            }
            return acc;
        };
        double best = sse(joint);
        for (double d1 : {-0.05, 0.0, 0.05})
            for (double d2 : {-0.05, 0.0, 0.05})
                for (double d3 : {-0.05, 0.0, 0.05})
                    for (double d4 : {-0.02, 0.0, 0.02}) {
                        LogisticParams q = joint;
                        q.b1 += d1;
                        q.b2 += d2;
                        q.b3 += d3;
                        q.b4 += d4;
                        CHECK(sse(q) >= best - 1e-9);
                    }
    }
    SUBCASE("disjoint stimuli are rejected") {
        PairedSeries c = b;
        for (auto& id : c.stimulus_ids) id += "_other";
        CHECK_THROWS_AS(fit_logistic_joint(a, c), MisalignedVariantsError);
    }
}

}  // TEST_SUITE
