#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "jndbench/criteria.hpp"
#include "jndbench/errors.hpp"
#include "test_support.hpp"

using namespace jndbench;

namespace {

// O(n^2) pair-count tau-b, the brute-force oracle.
double kendall_bruteforce(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    long long concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = x[i] - x[j];
            double dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) {
                ++tie_x;
                ++tie_y;
            } else if (dx == 0.0) {
                ++tie_x;
            } else if (dy == 0.0) {
                ++tie_y;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    }
    double n0 = 0.5 * static_cast<double>(n) * (n - 1);
    double denom = std::sqrt(n0 - static_cast<double>(tie_x)) *
                   std::sqrt(n0 - static_cast<double>(tie_y));
    return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);
}

// Direct pairwise SA evaluation used as the pwrc oracle.
double sa_bruteforce(const std::vector<double>& pred, const std::vector<double>& target,
                     double threshold, double lambda) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < pred.size(); ++i) {
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            if (!(std::fabs(target[i] - target[j]) > threshold)) continue;
            double w = std::exp(-std::min(target[i], target[j]) / lambda);
            den += w;
            double sp = pred[i] == pred[j] ? 0.0 : (pred[i] > pred[j] ? 1.0 : -1.0);
            double st = target[i] > target[j] ? 1.0 : -1.0;
            num += w * sp * st;
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace

TEST_SUITE("criteria") {

TEST_CASE("plcc") {
    SUBCASE("perfect affine") {
        std::vector<double> x{1, 2, 3, 4, 5};
        std::vector<double> y;
        for (double v : x) y.push_back(2.0 * v + 1.0);
        CHECK(plcc(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("perfect inverse") {
        std::vector<double> x{1, 2, 3};
        std::vector<double> y{-1, -2, -3};
        CHECK(plcc(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("hand case") {
        std::vector<double> x{1, 2, 3, 4};
        std::vector<double> y{1, 3, 2, 4};
        CHECK(plcc(x, y) == doctest::Approx(0.8).epsilon(1e-12));
    }
    SUBCASE("constant series rejected") {
        std::vector<double> x{1, 1, 1};
        std::vector<double> y{1, 2, 3};
        CHECK_THROWS_AS(plcc(x, y), ConstantSeriesError);
    }
    SUBCASE("affine invariance to 1e-12") {
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 30; ++trial) {
            auto x = testsupport::random_vector(rng, 50, -5, 5);
            auto y = testsupport::random_vector(rng, 50, -5, 5);
            double base = plcc(x, y);
            std::vector<double> x2;
            for (double v : x) x2.push_back(3.5 * v - 11.0);
            CHECK(std::fabs(plcc(x2, y) - base) < 1e-12);
        }
    }
}

TEST_CASE("srocc") {
    SUBCASE("strictly monotone map gives 1") {
        std::vector<double> x{0.3, 1.5, 2.0, 7.7, 9.1};
        std::vector<double> y;
        for (double v : x) y.push_back(std::exp(v));
        CHECK(srocc(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("hand case") {
        std::vector<double> x{1, 2, 3, 4};
        std::vector<double> y{1, 3, 2, 4};
        CHECK(srocc(x, y) == doctest::Approx(0.8).epsilon(1e-12));
    }
    SUBCASE("equals pearson of ranks on tie-free data") {
        std::mt19937_64 rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            auto x = testsupport::random_vector(rng, 80, -1, 1);
            auto y = testsupport::random_vector(rng, 80, -1, 1);
            auto rx = fractional_ranks(x);
            auto ry = fractional_ranks(y);
            CHECK(std::fabs(srocc(x, y) - plcc(rx, ry)) < 1e-12);
        }
    }
    SUBCASE("invariant under strictly increasing maps") {
        std::mt19937_64 rng(6);
        auto x = testsupport::random_vector(rng, 60, 0.1, 4.0);
        auto y = testsupport::random_vector(rng, 60, -2.0, 2.0);
        double base = srocc(x, y);
        std::vector<double> cubed, expd, scaled;
        for (double v : x) {
            cubed.push_back(v * v * v);
            expd.push_back(std::exp(v));
            scaled.push_back(5.0 * v + 2.0);
        }
        CHECK(srocc(cubed, y) == doctest::Approx(base).epsilon(1e-12));
        CHECK(srocc(expd, y) == doctest::Approx(base).epsilon(1e-12));
        CHECK(srocc(scaled, y) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("kendall tau-b") {
    SUBCASE("identical rankings") {
        std::vector<double> x{1, 2, 3, 4, 5};
        CHECK(kendall_tau(x, x) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("reversed") {
        std::vector<double> x{1, 2, 3};
        std::vector<double> y{3, 2, 1};
        CHECK(kendall_tau(x, y) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("hand case 5 concordant 1 discordant") {
        std::vector<double> x{1, 2, 3, 4};
        std::vector<double> y{1, 3, 2, 4};
        CHECK(kendall_tau(x, y) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("matches brute force on tie-free fuzz") {
        std::mt19937_64 rng(8);
        for (int trial = 0; trial < 30; ++trial) {
            std::size_t n = 10 + rng() % 150;
            auto x = testsupport::random_vector(rng, n, -10, 10);
            auto y = testsupport::random_vector(rng, n, -10, 10);
            CHECK(kendall_tau(x, y) == doctest::Approx(kendall_bruteforce(x, y)).epsilon(1e-13));
        }
    }
    SUBCASE("matches brute force with heavy ties") {
        std::mt19937_64 rng(10);
        for (int trial = 0; trial < 30; ++trial) {
            std::size_t n = 10 + rng() % 100;
            std::vector<double> x(n), y(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = static_cast<double>(rng() % 6);
                y[i] = static_cast<double>(rng() % 4);
            }
            if (std::count(x.begin(), x.end(), x[0]) == static_cast<long>(n) ||
                std::count(y.begin(), y.end(), y[0]) == static_cast<long>(n))
                continue;
            CHECK(kendall_tau(x, y) == doctest::Approx(kendall_bruteforce(x, y)).epsilon(1e-13));
        }
    }
    SUBCASE("all tied rejected") {
        std::vector<double> x{1, 1, 1};
        std::vector<double> y{1, 2, 3};
        CHECK_THROWS_AS(kendall_tau(x, y), ConstantSeriesError);
    }
}

TEST_CASE("correlations never leave [-1, 1]") {
    // Perfectly monotone data can land an ulp above 1 through
    // sqrt-of-product rounding; the results must stay clamped.
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 3 + rng() % 60;
        auto x = testsupport::random_vector(rng, n, -5, 5);
        std::vector<double> y;
        for (double v : x) y.push_back(trial % 2 == 0 ? 2.0 * v + 1.0 : -3.0 * v);
        for (double r : {plcc(x, y), srocc(x, y), kendall_tau(x, y)}) {
            CHECK(r >= -1.0);
            CHECK(r <= 1.0);
        }
    }
}

TEST_CASE("rmse and z_rmse") {
    SUBCASE("zero on equal series") {
        std::vector<double> a{1, 2, 3};
        CHECK(rmse(a, a) == 0.0);
        std::vector<double> s{0.1, 0.2, 0.3};
        CHECK(z_rmse(a, a, s) == 0.0);
    }
    SUBCASE("hand arithmetic") {
        std::vector<double> pred{3.0, -4.0};
        std::vector<double> target{0.0, 0.0};
        CHECK(rmse(pred, target) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
    }
    SUBCASE("single standardized sample") {
        std::vector<double> pred{1.0};
        std::vector<double> target{0.0};
        std::vector<double> sigma{0.5};
        CHECK(z_rmse(pred, target, sigma) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("z_rmse with unit sigma equals rmse exactly") {
        std::mt19937_64 rng(12);
        auto pred = testsupport::random_vector(rng, 100, -3, 3);
        auto target = testsupport::random_vector(rng, 100, -3, 3);
        std::vector<double> ones(100, 1.0);
        CHECK(z_rmse(pred, target, ones) == rmse(pred, target));
    }
    SUBCASE("nonpositive sigma rejected") {
        std::vector<double> a{1.0, 2.0};
        std::vector<double> s{0.1, 0.0};
        CHECK_THROWS_AS(z_rmse(a, a, s), NonPositiveSigmaError);
        CHECK_THROWS_AS(llr(a, a, s), NonPositiveSigmaError);
    }
    SUBCASE("length mismatch") {
        std::vector<double> a{1.0, 2.0};
        std::vector<double> b{1.0};
        CHECK_THROWS_AS(rmse(a, b), LengthMismatchError);
    }
}

TEST_CASE("llr") {
    SUBCASE("perfect predictor gives the null model") {
        std::vector<double> a{0.5, 1.5, 2.5};
        std::vector<double> s{0.1, 0.2, 0.3};
        CHECK(llr(a, a, s) == 0.0);
    }
    SUBCASE("two unit standardized residuals") {
        std::vector<double> pred{1.0, 2.0};
        std::vector<double> target{0.0, 1.0};
        std::vector<double> sigma{1.0, 1.0};
        CHECK(llr(pred, target, sigma) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("identity with z_rmse on fuzz data") {
        std::mt19937_64 rng(14);
        for (int trial = 0; trial < 1000; ++trial) {
            std::size_t n = 1 + rng() % 40;
            auto pred = testsupport::random_vector(rng, n, -4, 4);
            auto target = testsupport::random_vector(rng, n, -4, 4);
            auto sigma = testsupport::random_vector(rng, n, 0.01, 2.0);
            double left = llr(pred, target, sigma);
            double z = z_rmse(pred, target, sigma);
            double right = 0.5 * static_cast<double>(n) * z * z;
            CHECK(std::fabs(left - right) <= 1e-12 * std::max(left, 1e-30));
        }
    }
}

TEST_CASE("outlier ratio") {
    SUBCASE("perfect predictor") {
        std::vector<double> a{1, 2, 3};
        std::vector<double> s{0.1, 0.1, 0.1};
        CHECK(outlier_ratio(a, a, s) == 0.0);
    }
    SUBCASE("per-sample threshold") {
        std::vector<double> pred{0.1, 0.5};
        std::vector<double> target{0.0, 0.0};
        std::vector<double> sigma{0.1, 0.1};
        CHECK(outlier_ratio(pred, target, sigma, 1.96) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("monotone non-increasing in z") {
        std::mt19937_64 rng(16);
        auto pred = testsupport::random_vector(rng, 200, -1, 1);
        auto target = testsupport::random_vector(rng, 200, -1, 1);
        auto sigma = testsupport::random_vector(rng, 200, 0.05, 1.0);
        double prev = 1.0;
        for (double z : {0.5, 1.0, 1.5, 1.96, 2.5, 3.0}) {
            double cur = outlier_ratio(pred, target, sigma, z);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
    }
}

TEST_CASE("pwrc curve") {
    SUBCASE("perfectly concordant predictions") {
        std::vector<double> target{0.2, 0.9, 1.7, 2.5, 3.4};
        std::vector<double> pred = target;
        auto grid = default_st_grid(target);
        auto curve = pwrc_curve(pred, target, grid);
        for (std::size_t i = 0; i < curve.sa.size(); ++i) {
            bool any_active = false;
            for (std::size_t a = 0; a + 1 < target.size() && !any_active; ++a)
                for (std::size_t b = a + 1; b < target.size(); ++b)
                    if (std::fabs(target[a] - target[b]) > curve.thresholds[i]) {
                        any_active = true;
                        break;
                    }
            if (any_active)
                CHECK(curve.sa[i] == doctest::Approx(1.0).epsilon(1e-12));
            else
                CHECK(curve.sa[i] == 0.0);
        }
    }
    SUBCASE("threshold above the largest gap gives zero") {
        std::vector<double> target{1.0, 1.5, 2.0};
        std::vector<double> pred{0.0, 1.0, 2.0};
        std::vector<double> grid{0.0, 5.0};
        auto curve = pwrc_curve(pred, target, grid);
        CHECK(curve.sa[1] == 0.0);
    }
    SUBCASE("four point case matches exhaustive enumeration") {
        std::vector<double> target{0.1, 0.8, 1.9, 3.0};
        std::vector<double> pred{0.3, 0.2, 2.5, 2.9};
        std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
        auto curve = pwrc_curve(pred, target, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(curve.sa[i] ==
                  doctest::Approx(sa_bruteforce(pred, target, grid[i], kPwrcLambda)).epsilon(1e-13));
    }
    SUBCASE("SA within [-1,1] and reversal negates on tie-free data") {
        std::mt19937_64 rng(18);
        for (int trial = 0; trial < 20; ++trial) {
            auto target = testsupport::random_vector(rng, 25, 0.0, 4.0);
            auto pred = testsupport::random_vector(rng, 25, 0.0, 4.0);
            std::vector<double> reversed;
            for (double v : pred) reversed.push_back(-v);
            auto grid = default_st_grid(target);
            auto curve = pwrc_curve(pred, target, grid);
            auto anti = pwrc_curve(reversed, target, grid);
            for (std::size_t i = 0; i < curve.sa.size(); ++i) {
                CHECK(curve.sa[i] >= -1.0 - 1e-12);
                CHECK(curve.sa[i] <= 1.0 + 1e-12);
                CHECK(anti.sa[i] == doctest::Approx(-curve.sa[i]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("degenerate grids rejected") {
        std::vector<double> target{0.5, 1.0, 2.0};
        std::vector<double> pred{1.0, 2.0, 3.0};
        std::vector<double> not_from_zero{0.5, 1.0};
        CHECK_THROWS_AS(pwrc_curve(pred, target, not_from_zero), DegenerateGridError);
        std::vector<double> not_increasing{0.0, 1.0, 1.0};
        CHECK_THROWS_AS(pwrc_curve(pred, target, not_increasing), DegenerateGridError);
    }
}

TEST_CASE("pwrc auc") {
    SUBCASE("constant one over [0,6]") {
        SaStCurve c{{0.0, 2.0, 4.0, 6.0}, {1.0, 1.0, 1.0, 1.0}};
        CHECK(pwrc_auc(c) == doctest::Approx(6.0).epsilon(1e-15));
    }
    SUBCASE("constant zero") {
        SaStCurve c{{0.0, 3.0, 6.0}, {0.0, 0.0, 0.0}};
        CHECK(pwrc_auc(c) == 0.0);
    }
    SUBCASE("triangle") {
        SaStCurve c{{0.0, 1.0}, {1.0, 0.0}};
        CHECK(pwrc_auc(c) == doctest::Approx(0.5).epsilon(1e-15));
    }
}

TEST_CASE("criteria_report end to end") {
    // Dataset whose target is an exact logistic image of the raw scores, so
    // the fitted transform can be pointwise perfect.
    std::mt19937_64 rng(20);
    std::vector<StimulusRecord> recs;
    MetricScoreTable table;
    table.declare_polarity("perfect", Polarity::LowerIsBetter);
    table.declare_polarity("anti", Polarity::HigherIsBetter);
    LogisticParams gen{3.8, 0.0, 1.2, 0.6, 0.0, true};
    for (int i = 0; i < 60; ++i) {
        double raw = testsupport::uniform(rng, -1.0, 4.0);
        double mu = apply_logistic(gen, raw);
        StimulusRecord r{"st" + std::to_string(i), "s", "c", 1, mu, 0.05 + 0.08 * mu};
        recs.push_back(r);
        table.add_score("perfect", "full", r.stimulus_id, raw);
        table.add_score("anti", "full", r.stimulus_id, -raw);
    }
    SubjectiveDataset ds("gen", recs);

    SUBCASE("perfect predictor earns perfect criteria") {
        auto rep = criteria_report(ds, table, "perfect", "full", {FidelityTag::All, 1.0});
        CHECK(rep.n == 60);
        CHECK(rep.srocc == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.kt == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.plcc == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(rep.rmse < 1e-4);
        CHECK(rep.z_rmse < 1e-3);
        CHECK(rep.outlier_ratio == 0.0);
    }
    SUBCASE("rank criteria invariant under strictly increasing reparameterisation") {
        auto rep = criteria_report(ds, table, "perfect", "full", {FidelityTag::All, 1.0});
        MetricScoreTable cubed;
        cubed.declare_polarity("perfect", Polarity::LowerIsBetter);
        for (const auto& r : ds.records()) {
            double v = *table.score("perfect", "full", r.stimulus_id);
            cubed.add_score("perfect", "full", r.stimulus_id, v * v * v);
        }
        auto rep2 = criteria_report(ds, cubed, "perfect", "full", {FidelityTag::All, 1.0});
        CHECK(rep2.srocc == doctest::Approx(rep.srocc).epsilon(1e-12));
        CHECK(rep2.kt == doctest::Approx(rep.kt).epsilon(1e-12));
    }
    SUBCASE("higher-is-better metric is oriented before rank criteria") {
        auto rep = criteria_report(ds, table, "anti", "full", {FidelityTag::All, 1.0});
        CHECK(rep.srocc == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.kt == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("per-range reports use the global fit") {
        auto hf = criteria_report(ds, table, "perfect", "full", {FidelityTag::HF, 1.0});
        auto mf = criteria_report(ds, table, "perfect", "full", {FidelityTag::MF, 1.0});
        auto all = criteria_report(ds, table, "perfect", "full", {FidelityTag::All, 1.0});
        CHECK(hf.n + mf.n == all.n);
        CHECK(hf.rmse < 1e-4);
        CHECK(mf.rmse < 1e-4);
    }
    SUBCASE("report fields satisfy the llr identity") {
        auto rep = criteria_report(ds, table, "anti", "full", {FidelityTag::All, 1.0});
        double expected = 0.5 * static_cast<double>(rep.n) * rep.z_rmse * rep.z_rmse;
        CHECK(std::fabs(rep.llr - expected) <= 1e-9 * std::max(rep.llr, 1e-30));
    }
}

}  // TEST_SUITE
