#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "damf/boosting.hpp"
#include "damf/error.hpp"
#include "damf/learners.hpp"
#include "damf/split.hpp"
#include "damf/tree.hpp"

using namespace damf;

namespace {

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

Matrix column_matrix(const std::vector<double>& x) {
    Matrix X(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) X(i, 0) = x[i];
    return X;
}

GradHess squared_from_zero(const std::vector<double>& y) {
    return compute_grad_hess(LossKind::squared, y, std::vector<double>(y.size(), 0.0));
}

SupervisedDataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t p) {
    std::normal_distribution<double> normal(0.0, 1.0);
    SupervisedDataset ds;
    ds.X = Matrix(n, p);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < p; ++j) {
            ds.X(i, j) = std::round(normal(rng) * 4.0) / 4.0;
            s += (j + 1) * ds.X(i, j);
        }
        ds.y[i] = s + (ds.X(i, 0) > 0 ? 3.0 : -1.0) + 0.5 * normal(rng);
    }
    ds.row_times.resize(n);
    return ds;
}

double train_loss(const std::vector<double>& y, const std::vector<double>& pred) {
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += 0.5 * (y[i] - pred[i]) * (y[i] - pred[i]);
    return s;
}

}  // namespace

TEST(GradHess, Examples) {
    GradHess sq = compute_grad_hess(LossKind::squared, std::vector<double>{3}, std::vector<double>{1});
    EXPECT_EQ(sq.g[0], -2.0);
    EXPECT_EQ(sq.h[0], 1.0);
    EXPECT_EQ(-sq.g[0], 2.0);

    GradHess ab = compute_grad_hess(LossKind::absolute, std::vector<double>{3}, std::vector<double>{5});
    EXPECT_EQ(ab.g[0], 1.0);
    EXPECT_EQ(ab.h[0], kHessianFloor);
    GradHess tie = compute_grad_hess(LossKind::absolute, std::vector<double>{3}, std::vector<double>{3});
    EXPECT_EQ(tie.g[0], 0.0);

    GradHess rm = compute_grad_hess(LossKind::rmse_objective, std::vector<double>{3}, std::vector<double>{1});
    EXPECT_EQ(rm.g, sq.g);
    EXPECT_EQ(rm.h, sq.h);

    try {
        compute_grad_hess(LossKind::squared, std::vector<double>{1, 2}, std::vector<double>{1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
}

TEST(GradHess, HessianAlwaysAtLeastFloorForAbsolute) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0, 5);
    std::vector<double> y(200), p(200);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = normal(rng);
        p[i] = i % 10 == 0 ? y[i] : normal(rng);
    }
    GradHess gh = compute_grad_hess(LossKind::absolute, y, p);
    for (std::size_t i = 0; i < y.size(); ++i) {
        EXPECT_GE(gh.h[i], kHessianFloor);
        EXPECT_LE(std::abs(gh.g[i]), 1.0);
    }
}

TEST(SplitGain, HandEnumerationGives81) {
    Matrix X = column_matrix({1, 2, 3, 4});
    GradHess gh = squared_from_zero({1, 1, 10, 10});
    GrowParams p;
    p.lambda = 0;
    std::vector<std::size_t> f = {0};
    auto best = exact_best_split(X, iota_rows(4), f, gh, p);
    ASSERT_TRUE(best);
    EXPECT_EQ(best->threshold, 2.5);
    EXPECT_DOUBLE_EQ(best->gain, 81.0);
    EXPECT_DOUBLE_EQ(split_gain(-1, 1, -21, 3, 0.0), 27.0);
    EXPECT_DOUBLE_EQ(split_gain(-12, 3, -10, 1, 0.0), 27.0);

    p.gamma = 100;
    EXPECT_FALSE(exact_best_split(X, iota_rows(4), f, gh, p));
}

TEST(SplitGain, IdenticalValuesGiveNoSplit) {
    Matrix X = column_matrix({2, 2, 2, 2});
    GrowParams p;
    std::vector<std::size_t> f = {0};
    EXPECT_FALSE(exact_best_split(X, iota_rows(4), f, squared_from_zero({1, 5, 2, 8}), p));
}

TEST(SplitGain, SweepSidesSumToNodeTotals) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        SupervisedDataset ds = random_dataset(rng, 30, 3);
        GradHess gh = squared_from_zero(ds.y);
        std::vector<std::size_t> f = {0, 1, 2};
        GrowParams p;
        auto best = exact_best_split(ds.X, iota_rows(30), f, gh, p);
        ASSERT_TRUE(best);
        NodeTotals t = sum_rows(gh, iota_rows(30));
        EXPECT_NEAR(best->g_left + best->g_right, t.g, 1e-9 * std::max(1.0, std::abs(t.g)));
        EXPECT_NEAR(best->h_left + best->h_right, t.h, 1e-9 * t.h);
        EXPECT_EQ(best->n_left + best->n_right, 30u);
        EXPECT_DOUBLE_EQ(best->gain, split_gain(best->g_left, best->h_left, best->g_right, best->h_right, p.lambda));
    }
}

TEST(SplitGain, TiesGoToLowestFeature) {
    Matrix X(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        X(i, 0) = static_cast<double>(i);
        X(i, 1) = static_cast<double>(i);
    }
    std::vector<std::size_t> f = {0, 1};
    auto best = exact_best_split(X, iota_rows(4), f, squared_from_zero({1, 1, 10, 10}), GrowParams{});
    ASSERT_TRUE(best);
    EXPECT_EQ(best->feature, 0u);
}

TEST(LeafWeight, ClosedFormAtDepthZero) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_real_distribution<double> pos(0.1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 9;
        Matrix X(n, 1);
        GradHess gh;
        for (std::size_t i = 0; i < n; ++i) {
            X(i, 0) = u(rng);
            gh.g.push_back(u(rng) * 10);
            gh.h.push_back(pos(rng));
        }
        GrowParams p;
        p.lambda = pos(rng) - 0.1;
        p.max_depth = 0;
        std::vector<std::size_t> f = {0};
        DecisionTree t = build_tree_levelwise(X, iota_rows(n), f, gh, p);
        ASSERT_EQ(t.nodes().size(), 1u);
        NodeTotals tot = sum_rows(gh, iota_rows(n));
        const double expect = -tot.g / (tot.h + p.lambda);
        EXPECT_NEAR(t.nodes()[0].weight, expect, 1e-12 * std::max(1.0, std::abs(expect)));
    }
}

TEST(Levelwise, StumpOnGain81Fixture) {
    Matrix X = column_matrix({1, 2, 3, 4});
    GrowParams p;
    p.lambda = 0;
    p.max_depth = 1;
    std::vector<std::size_t> f = {0};
    DecisionTree t = build_tree_levelwise(X, iota_rows(4), f, squared_from_zero({1, 1, 10, 10}), p);
    ASSERT_EQ(t.leaf_count(), 2u);
    EXPECT_EQ(t.nodes()[0].threshold, 2.5);
    EXPECT_EQ(t.predict(X.row(0)), 1.0);
    EXPECT_EQ(t.predict(X.row(3)), 10.0);
}

TEST(Levelwise, OneRowNodesStayLeaves) {
    Matrix X = column_matrix({1, 2});
    GrowParams p;
    p.lambda = 0;
    p.max_depth = 2;
    std::vector<std::size_t> f = {0};
    DecisionTree t = build_tree_levelwise(X, iota_rows(2), f, squared_from_zero({1, 5}), p);
    EXPECT_EQ(t.leaf_count(), 2u);
    EXPECT_EQ(t.depth(), 1);
}

TEST(Levelwise, RespectsDepthAndFeatureMask) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        SupervisedDataset ds = random_dataset(rng, 50, 4);
        GrowParams p;
        p.max_depth = 1 + trial % 4;
        std::vector<std::size_t> f = {1, 3};
        DecisionTree t = build_tree_levelwise(ds.X, iota_rows(50), f, squared_from_zero(ds.y), p);
        EXPECT_LE(t.depth(), p.max_depth);
        for (const TreeNode& n : t.nodes()) {
            if (!n.is_leaf()) {
                EXPECT_TRUE(n.feature == 1 || n.feature == 3);
            }
        }
    }
}

TEST(BoostFit, TwoPointExample) {
    SupervisedDataset ds;
    ds.X = column_matrix({0, 1});
    ds.y = {2, 4};
    ds.row_times.resize(2);
    BoostConfig cfg;
    cfg.n_trees = 1;
    cfg.max_depth = 0;
    cfg.lambda = 0;
    cfg.learning_rate = 1;
    cfg.subsample = 1;
    cfg.colsample_bytree = 1;
    LevelwiseExactLearner learner;
    BoostFit fit = boost_fit(ds, learner, cfg);
    EXPECT_EQ(fit.ensemble.base_score, 3.0);
    EXPECT_EQ(fit.ensemble.trees.at(0).nodes()[0].weight, 0.0);
    EXPECT_EQ(ensemble_predict(fit.ensemble, ds.X), (std::vector<double>{3, 3}));
}

TEST(BoostFit, ZeroTreesPredictsMean) {
    std::mt19937_64 rng(2);
    SupervisedDataset ds = random_dataset(rng, 20, 2);
    BoostConfig cfg;
    cfg.n_trees = 0;
    LevelwiseExactLearner learner;
    BoostFit fit = boost_fit(ds, learner, cfg);
    const double mean = std::accumulate(ds.y.begin(), ds.y.end(), 0.0) / 20.0;
    for (double v : ensemble_predict(fit.ensemble, ds.X)) EXPECT_EQ(v, mean);
}

TEST(BoostFit, Errors) {
    SupervisedDataset empty;
    empty.X = Matrix(0, 2);
    LevelwiseExactLearner learner;
    BoostConfig cfg;
    try {
        boost_fit(empty, learner, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
    }
    cfg.subsample = 0;
    std::mt19937_64 rng(1);
    SupervisedDataset ds = random_dataset(rng, 5, 1);
    try {
        boost_fit(ds, learner, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
    Ensemble model;
    model.n_features = 3;
    try {
        ensemble_predict(model, Matrix(2, 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FeatureCountMismatch);
    }
}

TEST(Ensemble, ConstantTreeAddsScaledOutput) {
    Ensemble m;
    m.base_score = 5;
    m.learning_rate = 0.1;
    m.n_features = 1;
    m.trees.emplace_back(7.0);
    EXPECT_EQ(ensemble_predict(m, Matrix(3, 1)), (std::vector<double>(3, 5.0 + 0.1 * 7.0)));
}

TEST(Ensemble, EachTreeAddsExactlyItsScaledOutput) {
    std::mt19937_64 rng(4);
    for (Variant v : {Variant::levelwise_exact, Variant::leafwise_histogram, Variant::oblivious_ordered}) {
        SupervisedDataset ds = random_dataset(rng, 60, 3);
        BoostConfig cfg = preset_config(v);
        cfg.n_trees = 8;
        cfg.max_depth = 3;
        auto learner = make_learner(v);
        BoostFit fit = boost_fit(ds, *learner, cfg);
        Ensemble prefix = fit.ensemble;
        prefix.trees.clear();
        std::vector<double> prev = ensemble_predict(prefix, ds.X);
        Matrix T = transform_matrix(fit.ensemble.transform, ds.X);
        for (const DecisionTree& tree : fit.ensemble.trees) {
            prefix.trees.push_back(tree);
            std::vector<double> next = ensemble_predict(prefix, ds.X);
            for (std::size_t i = 0; i < next.size(); ++i) {
                ASSERT_EQ(next[i], prev[i] + cfg.learning_rate * tree.predict(T.row(i)));
            }
            prev = next;
        }
    }
}

TEST(BoostFit, TrainingLossNeverIncreases) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        SupervisedDataset ds = random_dataset(rng, 40, 3);
        BoostConfig cfg;
        cfg.subsample = 1;
        cfg.colsample_bytree = 1;
        cfg.learning_rate = 0.3 + 0.7 * (trial % 2);
        cfg.lambda = trial % 3;
        cfg.max_depth = 1 + trial % 4;
        cfg.min_child_weight = 0;
        cfg.n_trees = 15;
        LevelwiseExactLearner learner;
        BoostFit fit = boost_fit(ds, learner, cfg);
        Ensemble prefix = fit.ensemble;
        prefix.trees.clear();
        double last = train_loss(ds.y, ensemble_predict(prefix, ds.X));
        for (const DecisionTree& tree : fit.ensemble.trees) {
            prefix.trees.push_back(tree);
            const double now = train_loss(ds.y, ensemble_predict(prefix, ds.X));
            ASSERT_LE(now, last + 1e-12 * std::max(1.0, last)) << "trial " << trial;
            last = now;
        }
    }
}

TEST(BoostFit, DeterministicForSeed) {
    std::mt19937_64 rng(6);
    SupervisedDataset ds = random_dataset(rng, 80, 4);
    for (Variant v : {Variant::levelwise_exact, Variant::leafwise_histogram, Variant::oblivious_ordered}) {
        BoostConfig cfg = preset_config(v);
        cfg.n_trees = 10;
        cfg.max_depth = 4;
        auto a = make_learner(v);
        auto b = make_learner(v);
        BoostFit fa = boost_fit(ds, *a, cfg);
        BoostFit fb = boost_fit(ds, *b, cfg);
        EXPECT_EQ(fa.ensemble.trees, fb.ensemble.trees) << to_string(v);
        EXPECT_EQ(fa.train_predictions, fb.train_predictions);
    }
}

TEST(BoostFit, LoopPredictionsMatchStoredTrees) {
    std::mt19937_64 rng(12);
    SupervisedDataset ds = random_dataset(rng, 70, 3);
    for (Variant v : {Variant::levelwise_exact, Variant::leafwise_histogram}) {
        BoostConfig cfg = preset_config(v);
        cfg.n_trees = 12;
        cfg.max_depth = 4;
        auto learner = make_learner(v);
        BoostFit fit = boost_fit(ds, *learner, cfg);
        std::vector<double> again(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            std::vector<double> x(transformed_width(fit.ensemble.transform, ds.X.cols()));
            transform_row(fit.ensemble.transform, ds.X.row(i), x);
            double s = fit.ensemble.base_score;
            for (const DecisionTree& t : fit.ensemble.trees) s += fit.ensemble.learning_rate * t.predict(x);
            again[i] = s;
        }
        EXPECT_EQ(again, fit.train_predictions) << to_string(v);
        EXPECT_EQ(ensemble_predict(fit.ensemble, ds.X), fit.train_predictions) << to_string(v);
    }
}

TEST(BoostFit, RowOrderDoesNotMatterForExactLearner) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        SupervisedDataset ds = random_dataset(rng, 40, 3);
        std::vector<std::size_t> perm = iota_rows(40);
        std::shuffle(perm.begin(), perm.end(), rng);
        SupervisedDataset sh;
        sh.X = ds.X.select_rows(perm);
        for (std::size_t i : perm) sh.y.push_back(ds.y[i]);
        sh.row_times.resize(40);
        BoostConfig cfg;
        cfg.subsample = 1;
        cfg.colsample_bytree = 1;
        cfg.n_trees = 10;
        cfg.max_depth = 3;
        LevelwiseExactLearner a, b;
        BoostFit fa = boost_fit(ds, a, cfg);
        BoostFit fb = boost_fit(sh, b, cfg);
        std::vector<double> pa = ensemble_predict(fa.ensemble, ds.X);
        std::vector<double> pb = ensemble_predict(fb.ensemble, ds.X);
        for (std::size_t i = 0; i < 40; ++i) EXPECT_NEAR(pa[i], pb[i], 1e-9);
    }
}

TEST(Presets, MatchBenchmarkTable) {
    BoostConfig x = preset_config(Variant::levelwise_exact);
    EXPECT_EQ(x.n_trees, 300);
    EXPECT_EQ(x.learning_rate, 0.01);
    EXPECT_EQ(x.max_depth, 10);
    EXPECT_EQ(x.subsample, 0.8);
    EXPECT_EQ(x.colsample_bytree, 0.9);
    EXPECT_EQ(x.loss, LossKind::squared);
    BoostConfig l = preset_config(Variant::leafwise_histogram);
    EXPECT_EQ(l.n_trees, 300);
    EXPECT_EQ(l.colsample_bytree, 0.9);
    BoostConfig c = preset_config(Variant::oblivious_ordered);
    EXPECT_EQ(c.n_trees, 500);
    EXPECT_EQ(c.loss, LossKind::rmse_objective);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.max_depth, 10);
}

TEST(Sampling, RowsAreSortedDistinctAndSized) {
    std::mt19937_64 rng(3);
    for (std::size_t n : {1u, 10u, 101u}) {
        for (double f : {0.1, 0.5, 0.8, 1.0}) {
            auto rows = sample_rows(n, f, rng);
            EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
            EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
            EXPECT_GE(rows.size(), 1u);
            EXPECT_LE(rows.size(), n);
            if (f == 1.0) EXPECT_EQ(rows, iota_rows(n));
        }
    }
}

TEST(Tree, SplitRecordsGrowthOrder) {
    DecisionTree t;
    auto [l, r] = t.split(0, 0, 1.5);
    EXPECT_EQ(l, 1u);
    EXPECT_EQ(r, 2u);
    auto [l2, r2] = t.split(2, 1, 0.0);
    EXPECT_EQ(l2, 3u);
    EXPECT_EQ(r2, 4u);
    EXPECT_EQ(t.leaf_count(), 3u);
    EXPECT_EQ(t.depth(), 2);
    t.set_weight(3, -1);
    t.set_weight(4, 1);
    t.set_weight(1, 9);
    std::vector<double> a = {1.0, 5.0}, b = {2.0, -1.0}, c = {2.0, 1.0};
    EXPECT_EQ(t.predict(a), 9.0);
    EXPECT_EQ(t.predict(b), -1.0);
    EXPECT_EQ(t.predict(c), 1.0);
}
