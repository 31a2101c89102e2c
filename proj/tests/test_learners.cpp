#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "frugal/learners.hpp"
#include "frugal/rng.hpp"

using namespace frugal;

namespace {

TabularDataset load(const std::string& csv, const std::string& class_column = "class") {
    std::istringstream in(csv);
    return load_dataset_csv(in, class_column, "fixture");
}

std::vector<std::size_t> all_rows(const TabularDataset& data) {
    std::vector<std::size_t> rows(data.n_rows());
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

// 1-D threshold dataset: class b iff x > 0, with a margin around zero
TabularDataset threshold_dataset(int per_class) {
    std::string csv = "x,class\n";
    for (int i = 0; i < per_class; ++i) {
        const double neg = -1.0 + 0.9 * i / (per_class - 1);  // [-1, -0.1]
        const double pos = 0.1 + 0.9 * i / (per_class - 1);   // [0.1, 1]
        csv += std::to_string(neg) + ",a\n";
        csv += std::to_string(pos) + ",b\n";
    }
    return load(csv);
}

// O(n^2) pair-counting oracle: (concordant + ties/2) / (pos * neg)
double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    double num = 0.0;
    long n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            ++n_pos;
            continue;
        }
        ++n_neg;
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            if (scores[i] > scores[j])
                num += 1.0;
            else if (scores[i] == scores[j])
                num += 0.5;
        }
    }
    return num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

TEST_CASE("load_dataset_csv types columns") {
    const TabularDataset data = load(
        "x,color,class\n"
        "1.5,red,yes\n"
        "2.5,blue,no\n"
        "?,red,yes\n"
        "3.0,,no\n");
    REQUIRE(data.predictors.size() == 2);
    CHECK(data.predictors[0].kind == ColumnKind::numeric);
    CHECK(std::isnan(data.predictors[0].numeric[2]));
    CHECK(data.predictors[1].kind == ColumnKind::nominal);
    CHECK(data.predictors[1].labels == std::vector<std::string>{"blue", "red"});
    CHECK(data.predictors[1].nominal[3] == -1);  // empty cell is missing
    CHECK(data.class_names == std::vector<std::string>{"no", "yes"});
}

TEST_CASE("load_dataset_csv rejects degenerate inputs") {
    CHECK_THROWS_AS(load("x,class\n1,only\n2,only\n"), Error);     // single class value
    CHECK_THROWS_AS(load("x,cls\n1,a\n2,b\n"), Error);             // missing class column
    CHECK_THROWS_AS(load("x,class\n"), Error);                     // empty body
    CHECK_THROWS_AS(load("x,class\n1\n"), Error);                  // ragged row
    CHECK_THROWS_AS(load("x,class\n1,a\n2,?\n3,b\n"), Error);      // missing class label
}

TEST_CASE("zeror scores with the training frequencies") {
    const TabularDataset data = load(
        "x,class\n1,a\n2,a\n3,a\n4,a\n5,a\n6,a\n7,a\n8,b\n9,b\n10,b\n");
    const auto rows = all_rows(data);
    const ScoreMatrix scores = train_predict_zeror(data, rows, rows);
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        CHECK(scores(r, 0) == 0.7);
        CHECK(scores(r, 1) == 0.3);
    }
    // constant scores give AUC 0.5 under midranks
    std::vector<double> col(data.n_rows());
    std::vector<int> labels(data.class_labels.begin(), data.class_labels.end());
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = scores(static_cast<Eigen::Index>(i), 1);
    CHECK(auc_binary(col, labels) == 0.5);
}

TEST_CASE("zeror on a single-instance train") {
    const TabularDataset data = load("x,class\n1,a\n2,b\n");
    const std::vector<std::size_t> train = {0};
    const std::vector<std::size_t> test = {1};
    const ScoreMatrix scores = train_predict_zeror(data, train, test);
    CHECK(scores(0, 0) == 1.0);
    CHECK(scores(0, 1) == 0.0);
}

TEST_CASE("stump separates a threshold problem perfectly") {
    const TabularDataset data = threshold_dataset(20);
    const auto rows = all_rows(data);
    const ScoreMatrix scores = train_predict_stump(data, rows, rows);
    std::vector<double> col(data.n_rows());
    std::vector<int> labels(data.class_labels.begin(), data.class_labels.end());
    for (std::size_t i = 0; i < col.size(); ++i) col[i] = scores(static_cast<Eigen::Index>(i), 1);
    CHECK(auc_binary(col, labels) == 1.0);
}

TEST_CASE("stump gain matches exhaustive enumeration on a 10-instance fixture") {
    const TabularDataset data = load(
        "x,y,class\n"
        "1,5,a\n2,4,a\n3,6,a\n4,1,b\n5,2,b\n"
        "6,3,b\n2.5,7,a\n3.5,8,b\n1.5,9,a\n4.5,0,b\n");
    const auto rows = all_rows(data);
    const StumpModel model = fit_stump(data, rows);

    // brute force over every attribute and midpoint threshold
    auto entropy = [](const std::vector<int>& counts) {
        const int total = counts[0] + counts[1];
        double h = 0.0;
        for (int c : counts) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / total;
            h -= p * std::log2(p);
        }
        return h;
    };
    double best_gain = 0.0;
    for (std::size_t a = 0; a < 2; ++a) {
        std::vector<double> values;
        for (std::size_t i = 0; i < data.n_rows(); ++i)
            values.push_back(data.predictors[a].numeric[i]);
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t t = 0; t + 1 < sorted.size(); ++t) {
            if (sorted[t] == sorted[t + 1]) continue;
            const double threshold = (sorted[t] + sorted[t + 1]) / 2.0;
            std::vector<int> left(2, 0), right(2, 0), parent(2, 0);
            for (std::size_t i = 0; i < data.n_rows(); ++i) {
                parent[static_cast<std::size_t>(data.class_labels[i])] += 1;
                auto& side = values[i] <= threshold ? left : right;
                side[static_cast<std::size_t>(data.class_labels[i])] += 1;
            }
            const int nl = left[0] + left[1], nr = right[0] + right[1];
            const double gain =
                entropy(parent) -
                (nl * entropy(left) + nr * entropy(right)) / static_cast<double>(nl + nr);
            best_gain = std::max(best_gain, gain);
        }
    }
    CHECK(model.gain == doctest::Approx(best_gain).epsilon(1e-12));
}

TEST_CASE("stump on label noise stays near 0.5") {
    // class labels independent of x: AUC should hover around chance
    double sum = 0.0;
    const int trials = 10;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(100 + static_cast<std::uint64_t>(trial));
        std::string csv = "x,class\n";
        for (int i = 0; i < 1000; ++i)
            csv += std::to_string(rng.uniform()) + "," + (rng.uniform() < 0.5 ? "a" : "b") + "\n";
        const TabularDataset data = load(csv);
        const auto rows = all_rows(data);
        // score held-out half to avoid the optimistic training fit
        std::vector<std::size_t> train(rows.begin(), rows.begin() + 500);
        std::vector<std::size_t> test(rows.begin() + 500, rows.end());
        const ScoreMatrix scores = train_predict_stump(data, train, test);
        std::vector<double> col(test.size());
        std::vector<int> labels(test.size());
        for (std::size_t i = 0; i < test.size(); ++i) {
            col[i] = scores(static_cast<Eigen::Index>(i), 1);
            labels[i] = data.class_labels[test[i]];
        }
        sum += auc_binary(col, labels);
    }
    CHECK(sum / trials == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("stump nominal split and missing handling") {
    const TabularDataset data = load(
        "color,class\nred,a\nred,a\nred,a\nblue,b\nblue,b\ngreen,b\n?,a\n");
    const auto rows = all_rows(data);
    const StumpModel model = fit_stump(data, rows);
    CHECK(model.attribute == 0);
    CHECK(model.nominal_value >= 0);
    // instances with the attribute missing fall back to the root distribution
    const ScoreMatrix scores = predict_stump(model, data, rows);
    CHECK(scores(6, 0) == doctest::Approx(model.fallback[0]));
}

TEST_CASE("naive bayes posteriors") {
    SUBCASE("symmetric two-Gaussian problem scores the midpoint 50/50") {
        const TabularDataset data = load(
            "x,class\n-3,a\n-2,a\n-1,a\n1,b\n2,b\n3,b\n");
        const auto rows = all_rows(data);
        auto learner = make_learner("naive_bayes");
        learner->fit(data, rows);
        TabularDataset probe = data;
        probe.predictors[0].numeric = {0.0};
        probe.class_labels = {0};
        const std::vector<std::size_t> mid = {0};
        const ScoreMatrix scores = learner->predict(probe, mid);
        CHECK(scores(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(scores(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("posteriors always sum to one") {
        Rng rng(5);
        std::string csv = "x,y,color,class\n";
        for (int i = 0; i < 60; ++i) {
            csv += std::to_string(rng.normal()) + "," + std::to_string(rng.normal()) + "," +
                   (rng.uniform() < 0.3 ? "u" : "v") + "," + (rng.uniform() < 0.5 ? "a" : "b") +
                   "\n";
        }
        const TabularDataset data = load(csv);
        const auto rows = all_rows(data);
        const ScoreMatrix scores = train_predict_naive_bayes(data, rows, rows);
        for (Eigen::Index r = 0; r < scores.rows(); ++r) {
            CHECK(std::abs(scores.row(r).sum() - 1.0) < 1e-12);
            for (Eigen::Index c = 0; c < scores.cols(); ++c) CHECK(std::isfinite(scores(r, c)));
        }
    }
    SUBCASE("well separated Gaussians reach AUC > 0.99") {
        Rng rng(6);
        std::string csv = "x,class\n";
        for (int i = 0; i < 250; ++i) {
            csv += std::to_string(rng.normal(-5.0, 1.0)) + ",a\n";
            csv += std::to_string(rng.normal(5.0, 1.0)) + ",b\n";
        }
        const TabularDataset data = load(csv);
        const auto rows = all_rows(data);
        const ScoreMatrix scores = train_predict_naive_bayes(data, rows, rows);
        std::vector<double> col(data.n_rows());
        std::vector<int> labels(data.class_labels.begin(), data.class_labels.end());
        for (std::size_t i = 0; i < col.size(); ++i)
            col[i] = scores(static_cast<Eigen::Index>(i), 1);
        CHECK(auc_binary(col, labels) > 0.99);
    }
}

TEST_CASE("hyperpipes containment scoring") {
    const TabularDataset data = load(
        "x,y,class\n"
        "0.1,0.1,a\n0.9,0.9,a\n"
        "5.1,5.1,b\n5.9,5.9,b\n");
    const auto rows = all_rows(data);

    SUBCASE("inside exactly one pipe scores 1.0 there") {
        auto learner = make_learner("hyperpipes");
        learner->fit(data, rows);
        TabularDataset probe = data;
        probe.predictors[0].numeric = {0.5};
        probe.predictors[1].numeric = {0.5};
        probe.class_labels = {0};
        const ScoreMatrix scores = learner->predict(probe, std::vector<std::size_t>{0});
        CHECK(scores(0, 0) == 1.0);
        CHECK(scores(0, 1) == 0.0);
    }
    SUBCASE("outside all pipes scores 0 everywhere") {
        auto learner = make_learner("hyperpipes");
        learner->fit(data, rows);
        TabularDataset probe = data;
        probe.predictors[0].numeric = {100.0};
        probe.predictors[1].numeric = {100.0};
        probe.class_labels = {0};
        const ScoreMatrix scores = learner->predict(probe, std::vector<std::size_t>{0});
        CHECK(scores(0, 0) == 0.0);
        CHECK(scores(0, 1) == 0.0);
    }
    SUBCASE("disjoint boxes give AUC 1.0") {
        Rng rng(7);
        std::string csv = "x,y,class\n";
        for (int i = 0; i < 50; ++i) {
            csv += std::to_string(rng.uniform()) + "," + std::to_string(rng.uniform()) + ",a\n";
            csv += std::to_string(5.0 + rng.uniform()) + "," + std::to_string(5.0 + rng.uniform()) +
                   ",b\n";
        }
        const TabularDataset box = load(csv);
        const auto box_rows = all_rows(box);
        const ScoreMatrix scores = train_predict_hyperpipes(box, box_rows, box_rows);
        std::vector<double> col(box.n_rows());
        std::vector<int> labels(box.class_labels.begin(), box.class_labels.end());
        for (std::size_t i = 0; i < col.size(); ++i)
            col[i] = scores(static_cast<Eigen::Index>(i), 1);
        CHECK(auc_binary(col, labels) == 1.0);
    }
}

TEST_CASE("hyperpipes training scales linearly-ish in instances") {
    auto train_time = [](int n) {
        Rng rng(8);
        std::string csv = "a,b,c,d,class\n";
        for (int i = 0; i < n; ++i) {
            csv += std::to_string(rng.uniform()) + "," + std::to_string(rng.uniform()) + "," +
                   std::to_string(rng.uniform()) + "," + std::to_string(rng.uniform()) + "," +
                   (i % 2 == 0 ? "a" : "b") + "\n";
        }
        const TabularDataset data = load(csv);
        const auto rows = all_rows(data);
        auto learner = make_learner("hyperpipes");
        const auto t0 = std::chrono::steady_clock::now();
        learner->fit(data, rows);
        const auto t1 = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(t1 - t0).count();
    };
    const double small = train_time(500);
    const double large = train_time(4000);
    // sanity slope check, deliberately loose
    WARN_LE(large, 8.0 * 8.0 * small + 0.01);
}

TEST_CASE("auc_binary endpoints and oracle equivalence") {
    const std::vector<double> perfect = {0.1, 0.2, 0.8, 0.9};
    const std::vector<int> labels = {0, 0, 1, 1};
    CHECK(auc_binary(perfect, labels) == 1.0);
    const std::vector<double> reversed = {0.9, 0.8, 0.2, 0.1};
    CHECK(auc_binary(reversed, labels) == 0.0);

    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> scores(50);
        std::vector<int> lab(50);
        bool has_pos = false, has_neg = false;
        for (int i = 0; i < 50; ++i) {
            scores[static_cast<std::size_t>(i)] = std::round(rng.uniform() * 10.0) / 10.0;
            lab[static_cast<std::size_t>(i)] = rng.uniform() < 0.4 ? 1 : 0;
            (lab[static_cast<std::size_t>(i)] ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        CHECK(std::abs(auc_binary(scores, lab) - auc_oracle(scores, lab)) < 1e-12);
    }
}

TEST_CASE("auc_binary properties") {
    Rng rng(10);
    std::vector<double> scores(40);
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) {
        scores[static_cast<std::size_t>(i)] = rng.uniform();
        labels[static_cast<std::size_t>(i)] = i % 3 == 0 ? 1 : 0;
    }
    const double auc = auc_binary(scores, labels);

    SUBCASE("complement under label inversion") {
        std::vector<int> inverted(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) inverted[i] = 1 - labels[i];
        CHECK(std::abs(auc_binary(scores, inverted) + auc - 1.0) < 1e-12);
    }
    SUBCASE("invariant under strictly increasing transforms") {
        std::vector<double> exp_scores(scores.size()), affine_scores(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            exp_scores[i] = std::exp(scores[i]);
            affine_scores[i] = 3.0 * scores[i] + 11.0;
        }
        CHECK(auc_binary(exp_scores, labels) == auc);
        CHECK(auc_binary(affine_scores, labels) == auc);
    }
    SUBCASE("single-class labels are a metric error") {
        const std::vector<int> ones(40, 1);
        CHECK_THROWS_AS(auc_binary(scores, ones), Error);
    }
}

TEST_CASE("multiclass one-vs-all AUC") {
    SUBCASE("binary case equals auc_binary of the positive column") {
        Rng rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 30;
            ScoreMatrix scores(n, 2);
            std::vector<int> labels(n);
            bool has_both = false;
            for (int i = 0; i < n; ++i) {
                const double p = rng.uniform();
                scores(i, 0) = 1.0 - p;
                scores(i, 1) = p;
                labels[static_cast<std::size_t>(i)] = rng.uniform() < 0.5 ? 1 : 0;
            }
            has_both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                       std::count(labels.begin(), labels.end(), 0) > 0;
            if (!has_both) continue;
            std::vector<double> col(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = scores(i, 1);
            CHECK(std::abs(auc_multiclass_ova(scores, labels) - auc_binary(col, labels)) <
                  1e-12);
        }
    }
    SUBCASE("one-hot perfect scores give 1.0") {
        ScoreMatrix scores = ScoreMatrix::Zero(6, 3);
        std::vector<int> labels = {0, 1, 2, 0, 1, 2};
        for (int i = 0; i < 6; ++i) scores(i, labels[static_cast<std::size_t>(i)]) = 1.0;
        CHECK(auc_multiclass_ova(scores, labels) == 1.0);
    }
    SUBCASE("uniform scores give 0.5") {
        const ScoreMatrix scores = ScoreMatrix::Constant(9, 3, 1.0 / 3.0);
        const std::vector<int> labels = {0, 1, 2, 0, 1, 2, 0, 1, 2};
        CHECK(auc_multiclass_ova(scores, labels) == 0.5);
    }
    SUBCASE("absent classes are skipped") {
        ScoreMatrix scores = ScoreMatrix::Zero(4, 3);
        std::vector<int> labels = {0, 1, 0, 1};  // class 2 never appears
        for (int i = 0; i < 4; ++i) scores(i, labels[static_cast<std::size_t>(i)]) = 1.0;
        CHECK(auc_multiclass_ova(scores, labels) == 1.0);
    }
}

TEST_CASE("metered_evaluate") {
    SUBCASE("zeror pools to exactly 0.5 on a balanced dataset") {
        std::string csv = "x,class\n";
        for (int i = 0; i < 50; ++i) {
            csv += std::to_string(i) + ",a\n";
            csv += std::to_string(100 + i) + ",b\n";
        }
        const TabularDataset data = load(csv);
        const MeteredEval eval = metered_evaluate("zeror", data, {}, 0);
        CHECK(eval.auc == 0.5);
        CHECK(eval.train_ms >= 0.0);
        CHECK(eval.test_ms >= 0.0);
    }
    SUBCASE("separable stump fixture reaches AUC 1.0 under 10-fold CV") {
        const TabularDataset data = threshold_dataset(50);
        const MeteredEval eval = metered_evaluate("stump", data, {}, 0);
        CHECK(eval.auc == 1.0);
    }
    SUBCASE("same seed reproduces the AUC exactly") {
        const TabularDataset data = threshold_dataset(30);
        const MeteredEval a = metered_evaluate("naive_bayes", data, {}, 42);
        const MeteredEval b = metered_evaluate("naive_bayes", data, {}, 42);
        CHECK(a.auc == b.auc);
    }
    SUBCASE("holdout protocol") {
        const TabularDataset data = threshold_dataset(30);
        EvalProtocol protocol;
        protocol.kind = EvalProtocol::Kind::holdout;
        protocol.holdout_fraction = 0.3;
        const MeteredEval eval = metered_evaluate("stump", data, protocol, 1);
        CHECK(eval.auc == 1.0);
    }
    SUBCASE("a fold missing a class is a protocol error") {
        // class b has a single instance: every CV fold containing it in test
        // leaves ... actually its train split loses the class entirely
        const TabularDataset data = load("x,class\n1,a\n2,a\n3,a\n4,a\n5,a\n6,b\n");
        EvalProtocol protocol;
        protocol.folds = 6;
        try {
            metered_evaluate("zeror", data, protocol, 0);
            FAIL("expected a protocol error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::protocol);
            CHECK(std::string(e.what()).find("fewer folds") != std::string::npos);
        }
    }
    SUBCASE("the record round-trips into the evaldata module") {
        const TabularDataset data = threshold_dataset(10);
        const MeteredEval eval = metered_evaluate("hyperpipes", data, {}, 0);
        const EvalRecord rec = eval.to_record();
        const auto built = build_matrix({rec});
        CHECK(built.matrix.algorithms == std::vector<std::string>{"hyperpipes"});
        CHECK(built.matrix.datasets == std::vector<std::string>{"fixture"});
        CHECK(built.matrix.auc(0, 0) == eval.auc);
    }
}

TEST_CASE("every learner's probabilistic scores sum to one") {
    Rng rng(13);
    std::string csv = "x,y,class\n";
    for (int i = 0; i < 40; ++i)
        csv += std::to_string(rng.normal()) + "," + std::to_string(rng.normal()) + "," +
               (i % 3 == 0 ? "a" : (i % 3 == 1 ? "b" : "c")) + "\n";
    const TabularDataset data = load(csv);
    const auto rows = all_rows(data);
    for (const std::string learner : {"zeror", "stump", "naive_bayes"}) {
        const ScoreMatrix scores = train_predict(learner, data, rows, rows);
        for (Eigen::Index r = 0; r < scores.rows(); ++r)
            CHECK(std::abs(scores.row(r).sum() - 1.0) < 1e-12);
    }
    // hyperpipes scores are containment fractions, finite but not normalized
    const ScoreMatrix hp = train_predict("hyperpipes", data, rows, rows);
    for (Eigen::Index r = 0; r < hp.rows(); ++r)
        for (Eigen::Index c = 0; c < hp.cols(); ++c) {
            CHECK(std::isfinite(hp(r, c)));
            CHECK(hp(r, c) >= 0.0);
            CHECK(hp(r, c) <= 1.0);
        }
}

TEST_CASE("extract_meta_features") {
    SUBCASE("balanced binary entropy is one bit") {
        const TabularDataset data = threshold_dataset(50);
        const MetaFeatures mf = extract_meta_features(data);
        CHECK(mf.class_entropy == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mf.num_attributes == 1);
        CHECK(mf.max_nominal_att_distinct_values == -1);  // all-numeric sentinel
        CHECK(mf.majority_class_size == 50);
        CHECK(mf.decision_stump_auc == 1.0);  // the landmarker on separable data
    }
    SUBCASE("majority class and nominal counts") {
        std::string csv = "color,class\n";
        for (int i = 0; i < 60; ++i) csv += "red,a\n";
        for (int i = 0; i < 40; ++i) csv += (i % 2 ? "blue,b\n" : "green,b\n");
        const TabularDataset data = load(csv);
        const MetaFeatures mf = extract_meta_features(data);
        CHECK(mf.majority_class_size == 60);
        CHECK(mf.max_nominal_att_distinct_values == 3);
    }
    SUBCASE("csv row shape") {
        const TabularDataset data = threshold_dataset(10);
        const MetaFeatures mf = extract_meta_features(data);
        const std::string row = meta_features_csv_row("fixture", mf);
        CHECK(row.rfind("fixture,1,1,", 0) == 0);
    }
}

TEST_CASE("unknown learner ids are rejected") {
    CHECK_THROWS_AS(make_learner("forest"), Error);
}
