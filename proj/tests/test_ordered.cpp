#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "damf/error.hpp"
#include "damf/learners.hpp"
#include "damf/ordered.hpp"
#include "damf/split.hpp"

using namespace damf;

namespace {

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

OrderedContext identity_context(std::size_t n, double prior, double strength) {
    OrderedContext ctx = OrderedContext::make(n, 0, PrefixSchedule::stride1, prior, strength);
    ctx.perm = iota_rows(n);
    ctx.position = iota_rows(n);
    return ctx;
}

GradHess squared_from_zero(const std::vector<double>& y) {
    return compute_grad_hess(LossKind::squared, y, std::vector<double>(y.size(), 0.0));
}

// 32 rows: two numeric columns and one categorical column with 4 levels.
void fixture(std::mt19937_64& rng, Matrix& X, std::vector<double>& y) {
    std::normal_distribution<double> normal(0, 1);
    std::uniform_int_distribution<int> cat(0, 3);
    X = Matrix(32, 3);
    y.assign(32, 0.0);
    for (std::size_t i = 0; i < 32; ++i) {
        X(i, 0) = std::round(normal(rng) * 8) / 8;
        X(i, 1) = std::round(normal(rng) * 8) / 8;
        X(i, 2) = cat(rng);
        y[i] = 2 * X(i, 0) - X(i, 1) + 3 * X(i, 2) + 0.3 * normal(rng);
    }
}

}  // namespace

TEST(OrderedContext, PermutationAndSchedules) {
    OrderedContext e = OrderedContext::make(20, 7, PrefixSchedule::exponential);
    std::vector<std::size_t> sorted = e.perm;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, iota_rows(20));
    for (std::size_t p = 0; p < 20; ++p) EXPECT_EQ(e.position[e.perm[p]], p);
    EXPECT_EQ(e.schedule, (std::vector<std::size_t>{0, 1, 2, 4, 8, 16}));
    EXPECT_EQ(e.prefix_slot(0), 0u);
    EXPECT_EQ(e.prefix_slot(3), 2u);
    EXPECT_EQ(e.prefix_slot(19), 5u);
    OrderedContext s = OrderedContext::make(6, 7, PrefixSchedule::stride1);
    EXPECT_EQ(s.schedule, iota_rows(6));
    EXPECT_EQ(OrderedContext::make(20, 7, PrefixSchedule::exponential).perm, e.perm);
}

TEST(OrderedEncode, Examples) {
    OrderedContext ctx = identity_context(4, 15.0, 1.0);
    std::vector<double> cats = {1, 1, 1, 2};
    std::vector<double> y = {10, 20, 99, 50};
    std::vector<double> enc = ordered_target_encode(cats, y, ctx);
    EXPECT_EQ(enc[0], 15.0);
    EXPECT_EQ(enc[1], (10.0 + 15.0) / 2.0);
    EXPECT_EQ(enc[2], (10.0 + 20.0 + 15.0) / 3.0);
    EXPECT_EQ(enc[3], 15.0);
}

TEST(OrderedEncode, FullEncodingUsesEveryRowAndPriorForUnseen) {
    Matrix X(3, 1);
    X(0, 0) = 1; X(1, 0) = 1; X(2, 0) = 2;
    std::vector<double> y = {4, 8, 1};
    std::vector<std::size_t> slots = {0};
    CategoricalEncoding enc = full_target_encoding(X, y, slots, 0.5, 1.0);
    EXPECT_EQ(enc.encode(enc.slots[0], 1.0), (12.0 + 0.5) / 3.0);
    EXPECT_EQ(enc.encode(enc.slots[0], 7.0), 0.5);
}

TEST(OrderedBoosting, EmptyScheduleIsRejected) {
    OrderedContext ctx = OrderedContext::make(4, 1, PrefixSchedule::exponential);
    ctx.schedule.clear();
    Matrix X(4, 1);
    std::vector<double> y(4, 1.0);
    try {
        OrderedPrefixModels m(X, y, ctx, LossKind::squared, 0.1, GrowParams{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ScheduleEmpty);
    }
}

TEST(OrderedBoosting, FirstPositionSeesOnlyThePrior) {
    std::mt19937_64 rng(3);
    Matrix X;
    std::vector<double> y;
    fixture(rng, X, y);
    OrderedContext ctx = OrderedContext::make(32, 5, PrefixSchedule::exponential, 0.5, 1.0);
    OrderedPrefixModels m(X, y, ctx, LossKind::squared, 0.1, GrowParams{});
    for (int t = 0; t < 5; ++t) m.advance();
    EXPECT_EQ(m.ordered_predictions()[ctx.perm[0]], 0.5);
    EXPECT_EQ(m.ordered_predictions()[ctx.perm[1]], y[ctx.perm[0]]);
}

// Perturbing y_k leaves row k's encoding and its ordered prediction
// bit-identical. The residual y_k - prediction moves only through y_k itself.
TEST(OrderedBoosting, OwnTargetNeverReachesItsScore) {
    std::mt19937_64 rng(2718);
    std::vector<std::size_t> slots = {2};
    for (int trial = 0; trial < 50; ++trial) {
        Matrix X;
        std::vector<double> y;
        fixture(rng, X, y);
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(trial);
        OrderedContext ctx = OrderedContext::make(32, seed, PrefixSchedule::exponential, 0.5, 1.0);
        GrowParams params;
        params.max_depth = 3;
        params.lambda = 1;
        Matrix D = ordered_encode_matrix(X, y, slots, ctx);
        OrderedPrefixModels base(D, y, ctx, LossKind::squared, 0.3, params);
        for (int t = 0; t < 4; ++t) base.advance();
        std::vector<double> pred = base.ordered_predictions();
        for (std::size_t k = 0; k < 32; ++k) {
            std::vector<double> y2 = y;
            y2[k] += 37.5;
            Matrix D2 = ordered_encode_matrix(X, y2, slots, ctx);
            ASSERT_EQ(D2(k, 2), D(k, 2));
            OrderedPrefixModels moved(D2, y2, ctx, LossKind::squared, 0.3, params);
            for (int t = 0; t < 4; ++t) moved.advance();
            ASSERT_EQ(moved.ordered_predictions()[k], pred[k]) << "trial " << trial << " row " << k;
            GradHess r = moved.ordered_residuals();
            ASSERT_EQ(r.g[k], pred[k] - y2[k]);
        }
    }
}

TEST(OrderedBoosting, StrideOneMatchesBruteForcePrefixFits) {
    std::mt19937_64 rng(88);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix X(8, 2);
        std::vector<double> y(8);
        std::normal_distribution<double> normal(0, 1);
        for (std::size_t i = 0; i < 8; ++i) {
            X(i, 0) = std::round(normal(rng) * 4) / 4;
            X(i, 1) = std::round(normal(rng) * 4) / 4;
            y[i] = X(i, 0) * 3 + normal(rng);
        }
        OrderedContext ctx = OrderedContext::make(8, 50 + trial, PrefixSchedule::stride1, 0.25, 1.0);
        GrowParams params;
        params.max_depth = 2;
        params.lambda = 0.5;
        const double lr = 0.5;
        const int rounds = 3;
        OrderedPrefixModels m(X, y, ctx, LossKind::squared, lr, params);
        for (int t = 0; t < rounds; ++t) m.advance();
        std::vector<double> got = m.ordered_predictions();

        std::vector<std::size_t> feats = {0, 1};
        for (std::size_t k = 0; k < 8; ++k) {
            const std::size_t p = ctx.position[k];
            std::vector<std::size_t> prefix(ctx.perm.begin(), ctx.perm.begin() + static_cast<long>(p));
            double expect = ctx.prior;
            if (!prefix.empty()) {
                double s = 0;
                for (std::size_t r : prefix) s += y[r];
                const double base = s / static_cast<double>(prefix.size());
                std::vector<double> fit(8, base);
                expect = base;
                for (int t = 0; t < rounds; ++t) {
                    GradHess gh = compute_grad_hess(LossKind::squared, y, fit);
                    DecisionTree tree = build_tree_oblivious(X, prefix, feats, gh, params);
                    for (std::size_t r = 0; r < 8; ++r) fit[r] += lr * tree.predict(X.row(r));
                }
                expect = fit[k];
            }
            EXPECT_EQ(got[k], expect) << "trial " << trial << " row " << k;
        }
    }
}

TEST(Oblivious, DepthTwoFixture) {
    Matrix X(4, 2);
    const double xs[4][2] = {{1, 4}, {2, 1}, {3, 3}, {4, 2}};
    for (std::size_t i = 0; i < 4; ++i) {
        X(i, 0) = xs[i][0];
        X(i, 1) = xs[i][1];
    }
    GradHess gh = squared_from_zero({1, 3, 10, 14});
    GrowParams p;
    p.lambda = 0;
    p.max_depth = 2;
    std::vector<std::size_t> f = {0, 1};
    auto levels = find_oblivious_structure(X, iota_rows(4), f, gh, p);
    ASSERT_EQ(levels.size(), 2u);
    EXPECT_EQ(levels[0].feature, 0u);
    EXPECT_EQ(levels[0].threshold, 2.5);
    EXPECT_NEAR(levels[0].gain, 100.0, 1e-12);
    EXPECT_EQ(levels[1].feature, 1u);
    EXPECT_EQ(levels[1].threshold, 2.5);
    EXPECT_NEAR(levels[1].gain, 10.0, 1e-12);

    DecisionTree t = build_tree_oblivious(X, iota_rows(4), f, gh, p);
    EXPECT_EQ(t.leaf_count(), 4u);
    EXPECT_EQ(t.predict(X.row(0)), 1.0);
    EXPECT_EQ(t.predict(X.row(1)), 3.0);
    EXPECT_EQ(t.predict(X.row(2)), 10.0);
    EXPECT_EQ(t.predict(X.row(3)), 14.0);
}

TEST(Oblivious, Gain81FixtureStopsAfterOneLevel) {
    Matrix X(4, 1);
    for (std::size_t i = 0; i < 4; ++i) X(i, 0) = static_cast<double>(i + 1);
    GrowParams p;
    p.lambda = 0;
    p.max_depth = 2;
    std::vector<std::size_t> f = {0};
    auto levels = find_oblivious_structure(X, iota_rows(4), f, squared_from_zero({1, 1, 10, 10}), p);
    ASSERT_EQ(levels.size(), 1u);
    EXPECT_EQ(levels[0].threshold, 2.5);
    EXPECT_NEAR(levels[0].gain, 81.0, 1e-12);
}

TEST(Oblivious, DepthOneIsTheExactStump) {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> v(0, 9);
    std::normal_distribution<double> normal(0, 3);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix X(20, 3);
        std::vector<double> y(20);
        for (std::size_t i = 0; i < 20; ++i) {
            for (std::size_t j = 0; j < 3; ++j) X(i, j) = v(rng);
            y[i] = normal(rng) + X(i, trial % 3);
        }
        GradHess gh = squared_from_zero(y);
        GrowParams p;
        p.max_depth = 1;
        std::vector<std::size_t> f = {0, 1, 2};
        auto levels = find_oblivious_structure(X, iota_rows(20), f, gh, p);
        auto stump = exact_best_split(X, iota_rows(20), f, gh, p);
        ASSERT_EQ(levels.size(), stump ? 1u : 0u);
        if (stump) {
            EXPECT_EQ(levels[0].feature, stump->feature);
            EXPECT_EQ(levels[0].threshold, stump->threshold);
            EXPECT_NEAR(levels[0].gain, stump->gain, 1e-9 * std::max(1.0, stump->gain));
        }
    }
}

TEST(Oblivious, LevelsShareOneConditionAndFillEveryLeaf) {
    std::mt19937_64 rng(14);
    std::normal_distribution<double> normal(0, 1);
    for (int trial = 0; trial < 30; ++trial) {
        Matrix X(40, 3);
        std::vector<double> y(40);
        for (std::size_t i = 0; i < 40; ++i) {
            for (std::size_t j = 0; j < 3; ++j) X(i, j) = normal(rng);
            y[i] = X(i, 0) * X(i, 1) + normal(rng);
        }
        GrowParams p;
        p.max_depth = 1 + trial % 5;
        std::vector<std::size_t> f = {0, 1, 2};
        DecisionTree t = build_tree_oblivious(X, iota_rows(40), f, squared_from_zero(y), p);
        const int d = t.depth();
        EXPECT_EQ(t.leaf_count(), std::size_t{1} << d);
        std::vector<int> depth = t.node_depths();
        for (int level = 0; level < d; ++level) {
            std::set<std::pair<int, double>> conds;
            for (std::size_t i = 0; i < t.nodes().size(); ++i) {
                if (depth[i] == level) {
                    ASSERT_FALSE(t.nodes()[i].is_leaf());
                    conds.insert({t.nodes()[i].feature, t.nodes()[i].threshold});
                }
            }
            EXPECT_EQ(conds.size(), 1u);
        }
    }
}

TEST(ObliviousLearner, PrefixModelsOfAFitAreLeakFree) {
    std::mt19937_64 rng(15);
    SupervisedDataset ds;
    fixture(rng, ds.X, ds.y);
    ds.row_times.resize(32);
    ds.categorical_slots = {2};
    BoostConfig cfg = preset_config(Variant::oblivious_ordered);
    cfg.n_trees = 5;
    cfg.max_depth = 3;
    cfg.learning_rate = 0.2;
    ObliviousOrderedLearner a;
    boost_fit(ds, a, cfg);
    std::vector<double> pred = a.prefix_models().ordered_predictions();
    for (std::size_t k = 0; k < 32; k += 5) {
        SupervisedDataset moved = ds;
        moved.y[k] -= 11.0;
        ObliviousOrderedLearner b;
        boost_fit(moved, b, cfg);
        EXPECT_EQ(b.prefix_models().ordered_predictions()[k], pred[k]);
        EXPECT_EQ(b.design()(k, 2), a.design()(k, 2));
    }
}
