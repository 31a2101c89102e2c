#include "frugal/learners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "frugal/rng.hpp"
#include "frugal/text.hpp"

namespace frugal {

namespace {

constexpr double kVarianceFloor = 1e-9;

bool is_missing_token(std::string_view token) { return token.empty() || token == "?"; }

std::vector<double> laplace_distribution(const std::vector<long>& counts) {
    const long total = std::accumulate(counts.begin(), counts.end(), 0L);
    std::vector<double> dist(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
        dist[c] = static_cast<double>(counts[c] + 1) /
                  static_cast<double>(total + static_cast<long>(counts.size()));
    return dist;
}

double entropy_bits(const std::vector<long>& counts) {
    const long total = std::accumulate(counts.begin(), counts.end(), 0L);
    double h = 0.0;
    for (long c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

void check_trainable(const TabularDataset& data, IndexSpan train, const char* who,
                     bool needs_predictor) {
    if (train.empty())
        throw Error(ErrorKind::argument, std::string(who) + ": empty training split");
    if (needs_predictor && data.predictors.empty())
        throw Error(ErrorKind::argument, std::string(who) + ": dataset has no predictors");
}

}  // namespace

TabularDataset load_dataset_csv(std::istream& in, const std::string& class_column,
                                const std::string& name) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> cells;  // column major
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0)
            line.erase(0, 3);
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        auto fields = split_csv_line(text);
        if (header.empty()) {
            header = std::move(fields);
            cells.resize(header.size());
            continue;
        }
        if (fields.size() != header.size())
            throw Error(ErrorKind::parse, "wrong column count, line " + std::to_string(line_no));
        for (std::size_t c = 0; c < fields.size(); ++c) cells[c].push_back(std::move(fields[c]));
    }
    if (header.empty()) throw Error(ErrorKind::parse, "dataset has no header row");
    const auto class_it = std::find(header.begin(), header.end(), class_column);
    if (class_it == header.end())
        throw Error(ErrorKind::parse, "class column '" + class_column + "' not found");
    const std::size_t class_idx = static_cast<std::size_t>(class_it - header.begin());
    if (cells[class_idx].empty()) throw Error(ErrorKind::parse, "dataset has no data rows");

    TabularDataset data;
    data.name = name;

    std::set<std::string> class_values;
    for (std::size_t r = 0; r < cells[class_idx].size(); ++r) {
        if (is_missing_token(cells[class_idx][r]))
            throw Error(ErrorKind::parse, "missing class label in data row " + std::to_string(r + 1));
        class_values.insert(cells[class_idx][r]);
    }
    if (class_values.size() < 2)
        throw Error(ErrorKind::parse, "class column needs at least 2 observed values");
    data.class_names.assign(class_values.begin(), class_values.end());
    for (const auto& value : cells[class_idx]) {
        const auto it = std::lower_bound(data.class_names.begin(), data.class_names.end(), value);
        data.class_labels.push_back(static_cast<int>(it - data.class_names.begin()));
    }

    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == class_idx) continue;
        DataColumn col;
        col.name = header[c];
        bool all_numeric = true;
        for (const auto& token : cells[c]) {
            if (is_missing_token(token)) continue;
            double value;
            if (!parse_double(token, value)) {
                all_numeric = false;
                break;
            }
        }
        if (all_numeric) {
            col.kind = ColumnKind::numeric;
            col.numeric.reserve(cells[c].size());
            for (const auto& token : cells[c]) {
                if (is_missing_token(token)) {
                    col.numeric.push_back(std::numeric_limits<double>::quiet_NaN());
                } else {
                    double value = 0.0;
                    parse_double(token, value);
                    col.numeric.push_back(value);
                }
            }
        } else {
            col.kind = ColumnKind::nominal;
            std::set<std::string> values;
            for (const auto& token : cells[c])
                if (!is_missing_token(token)) values.insert(token);
            col.labels.assign(values.begin(), values.end());
            col.nominal.reserve(cells[c].size());
            for (const auto& token : cells[c]) {
                if (is_missing_token(token)) {
                    col.nominal.push_back(-1);
                } else {
                    const auto it = std::lower_bound(col.labels.begin(), col.labels.end(), token);
                    col.nominal.push_back(static_cast<int>(it - col.labels.begin()));
                }
            }
        }
        data.predictors.push_back(std::move(col));
    }
    return data;
}

TabularDataset load_dataset_csv_file(const std::string& path, const std::string& class_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path);
    std::string stem = path;
    if (const auto slash = stem.find_last_of("/\\"); slash != std::string::npos)
        stem.erase(0, slash + 1);
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos) stem.erase(dot);
    return load_dataset_csv(in, class_column, stem);
}

// ---------------------------------------------------------------------------
// learners

namespace {

class ZeroRLearner final : public Learner {
public:
    void fit(const TabularDataset& data, IndexSpan train) override {
        check_trainable(data, train, "zeror", false);
        freq_.assign(data.n_classes(), 0.0);
        for (std::size_t i : train) freq_[static_cast<std::size_t>(data.class_labels[i])] += 1.0;
        for (double& f : freq_) f /= static_cast<double>(train.size());
    }

    ScoreMatrix predict(const TabularDataset& data, IndexSpan test) const override {
        ScoreMatrix scores(static_cast<Eigen::Index>(test.size()),
                           static_cast<Eigen::Index>(data.n_classes()));
        for (Eigen::Index r = 0; r < scores.rows(); ++r)
            for (Eigen::Index c = 0; c < scores.cols(); ++c)
                scores(r, c) = freq_[static_cast<std::size_t>(c)];
        return scores;
    }

private:
    std::vector<double> freq_;
};

struct SplitCounts {
    std::vector<long> left;
    std::vector<long> right;

    double gain(double parent_entropy) const {
        const long n_left = std::accumulate(left.begin(), left.end(), 0L);
        const long n_right = std::accumulate(right.begin(), right.end(), 0L);
        const long n = n_left + n_right;
        if (n_left == 0 || n_right == 0) return 0.0;
        const double weighted = (static_cast<double>(n_left) * entropy_bits(left) +
                                 static_cast<double>(n_right) * entropy_bits(right)) /
                                static_cast<double>(n);
        return parent_entropy - weighted;
    }
};

class StumpLearner final : public Learner {
public:
    void fit(const TabularDataset& data, IndexSpan train) override {
        model_ = fit_stump(data, train);
    }

    ScoreMatrix predict(const TabularDataset& data, IndexSpan test) const override {
        return predict_stump(model_, data, test);
    }

    const StumpModel& model() const { return model_; }

private:
    StumpModel model_;
};

class NaiveBayesLearner final : public Learner {
public:
    void fit(const TabularDataset& data, IndexSpan train) override {
        check_trainable(data, train, "naive_bayes", true);
        const std::size_t k = data.n_classes();
        const std::size_t n_att = data.predictors.size();

        std::vector<long> class_counts(k, 0);
        for (std::size_t i : train)
            class_counts[static_cast<std::size_t>(data.class_labels[i])] += 1;
        prior_ = laplace_distribution(class_counts);

        gauss_.assign(n_att, std::vector<GaussStats>(k));
        gauss_global_.assign(n_att, GaussStats{});
        nominal_counts_.assign(n_att, {});

        for (std::size_t a = 0; a < n_att; ++a) {
            const DataColumn& col = data.predictors[a];
            if (col.kind == ColumnKind::numeric) {
                std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
                std::vector<long> n(k, 0);
                double g_sum = 0.0, g_sum_sq = 0.0;
                long g_n = 0;
                for (std::size_t i : train) {
                    if (col.missing(i)) continue;
                    const auto c = static_cast<std::size_t>(data.class_labels[i]);
                    const double v = col.numeric[i];
                    sum[c] += v;
                    sum_sq[c] += v * v;
                    n[c] += 1;
                    g_sum += v;
                    g_sum_sq += v * v;
                    g_n += 1;
                }
                for (std::size_t c = 0; c < k; ++c)
                    gauss_[a][c] = finish(sum[c], sum_sq[c], n[c]);
                gauss_global_[a] = finish(g_sum, g_sum_sq, g_n);
            } else {
                nominal_counts_[a].assign(k, std::vector<long>(col.labels.size(), 0));
                for (std::size_t i : train) {
                    if (col.missing(i)) continue;
                    nominal_counts_[a][static_cast<std::size_t>(data.class_labels[i])]
                                    [static_cast<std::size_t>(col.nominal[i])] += 1;
                }
            }
        }
    }

    ScoreMatrix predict(const TabularDataset& data, IndexSpan test) const override {
        const std::size_t k = data.n_classes();
        ScoreMatrix scores(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(k));
        std::vector<double> log_post(k);
        for (std::size_t t = 0; t < test.size(); ++t) {
            const std::size_t i = test[t];
            for (std::size_t c = 0; c < k; ++c) log_post[c] = std::log(prior_[c]);
            for (std::size_t a = 0; a < data.predictors.size(); ++a) {
                const DataColumn& col = data.predictors[a];
                if (col.missing(i)) continue;  // missing attribute: skip its factor
                if (col.kind == ColumnKind::numeric) {
                    if (gauss_global_[a].n == 0) continue;
                    const double v = col.numeric[i];
                    for (std::size_t c = 0; c < k; ++c) {
                        const GaussStats& st =
                            gauss_[a][c].n > 0 ? gauss_[a][c] : gauss_global_[a];
                        const double z = v - st.mean;
                        log_post[c] +=
                            -0.5 * std::log(2.0 * M_PI * st.var) - z * z / (2.0 * st.var);
                    }
                } else {
                    const auto v = static_cast<std::size_t>(col.nominal[i]);
                    for (std::size_t c = 0; c < k; ++c) {
                        const auto& row = nominal_counts_[a][c];
                        const long total = std::accumulate(row.begin(), row.end(), 0L);
                        const double p =
                            static_cast<double>(row[v] + 1) /
                            static_cast<double>(total + static_cast<long>(row.size()));
                        log_post[c] += std::log(p);
                    }
                }
            }
            const double max_log = *std::max_element(log_post.begin(), log_post.end());
            double norm = 0.0;
            for (std::size_t c = 0; c < k; ++c) norm += std::exp(log_post[c] - max_log);
            for (std::size_t c = 0; c < k; ++c)
                scores(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
                    std::exp(log_post[c] - max_log) / norm;
        }
        return scores;
    }

private:
    struct GaussStats {
        double mean = 0.0;
        double var = 1.0;
        long n = 0;
    };

    static GaussStats finish(double sum, double sum_sq, long n) {
        GaussStats st;
        st.n = n;
        if (n > 0) {
            st.mean = sum / static_cast<double>(n);
            st.var = std::max(sum_sq / static_cast<double>(n) - st.mean * st.mean,
                              kVarianceFloor);
        }
        return st;
    }

    std::vector<double> prior_;
    std::vector<std::vector<GaussStats>> gauss_;        // [attribute][class]
    std::vector<GaussStats> gauss_global_;              // fallback per attribute
    std::vector<std::vector<std::vector<long>>> nominal_counts_;  // [attribute][class][value]
};

class HyperPipesLearner final : public Learner {
public:
    void fit(const TabularDataset& data, IndexSpan train) override {
        check_trainable(data, train, "hyperpipes", true);
        const std::size_t k = data.n_classes();
        const std::size_t n_att = data.predictors.size();
        ranges_.assign(k, std::vector<NumericRange>(n_att));
        value_sets_.assign(k, std::vector<std::vector<bool>>(n_att));
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t a = 0; a < n_att; ++a)
                if (data.predictors[a].kind == ColumnKind::nominal)
                    value_sets_[c][a].assign(data.predictors[a].labels.size(), false);

        for (std::size_t i : train) {
            const auto c = static_cast<std::size_t>(data.class_labels[i]);
            for (std::size_t a = 0; a < n_att; ++a) {
                const DataColumn& col = data.predictors[a];
                if (col.missing(i)) continue;
                if (col.kind == ColumnKind::numeric) {
                    ranges_[c][a].lo = std::min(ranges_[c][a].lo, col.numeric[i]);
                    ranges_[c][a].hi = std::max(ranges_[c][a].hi, col.numeric[i]);
                } else {
                    value_sets_[c][a][static_cast<std::size_t>(col.nominal[i])] = true;
                }
            }
        }
    }

    ScoreMatrix predict(const TabularDataset& data, IndexSpan test) const override {
        const std::size_t k = data.n_classes();
        ScoreMatrix scores(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(k));
        for (std::size_t t = 0; t < test.size(); ++t) {
            const std::size_t i = test[t];
            long present = 0;
            for (const auto& col : data.predictors)
                if (!col.missing(i)) ++present;
            for (std::size_t c = 0; c < k; ++c) {
                long inside = 0;
                if (present > 0) {
                    for (std::size_t a = 0; a < data.predictors.size(); ++a) {
                        const DataColumn& col = data.predictors[a];
                        if (col.missing(i)) continue;
                        const bool hit =
                            col.kind == ColumnKind::numeric
                                ? ranges_[c][a].contains(col.numeric[i])
                                : value_sets_[c][a][static_cast<std::size_t>(col.nominal[i])];
                        if (hit) ++inside;
                    }
                }
                scores(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
                    present > 0 ? static_cast<double>(inside) / static_cast<double>(present)
                                : 0.0;
            }
        }
        return scores;
    }

private:
    struct NumericRange {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        bool contains(double v) const { return v >= lo && v <= hi; }
    };

    std::vector<std::vector<NumericRange>> ranges_;         // [class][attribute]
    std::vector<std::vector<std::vector<bool>>> value_sets_;  // [class][attribute][value]
};

}  // namespace

StumpModel fit_stump(const TabularDataset& data, IndexSpan train) {
    check_trainable(data, train, "stump", true);
    const std::size_t k = data.n_classes();

    std::vector<long> root_counts(k, 0);
    for (std::size_t i : train) root_counts[static_cast<std::size_t>(data.class_labels[i])] += 1;

    StumpModel model;
    model.fallback = laplace_distribution(root_counts);
    double best_gain = 0.0;

    for (std::size_t a = 0; a < data.predictors.size(); ++a) {
        const DataColumn& col = data.predictors[a];
        std::vector<std::size_t> present;
        for (std::size_t i : train)
            if (!col.missing(i)) present.push_back(i);
        if (present.size() < 2) continue;

        std::vector<long> present_counts(k, 0);
        for (std::size_t i : present)
            present_counts[static_cast<std::size_t>(data.class_labels[i])] += 1;
        const double parent_entropy = entropy_bits(present_counts);

        if (col.kind == ColumnKind::numeric) {
            std::stable_sort(present.begin(), present.end(), [&](std::size_t x, std::size_t y) {
                return col.numeric[x] < col.numeric[y];
            });
            SplitCounts counts{std::vector<long>(k, 0), present_counts};
            for (std::size_t p = 0; p + 1 < present.size(); ++p) {
                const std::size_t i = present[p];
                counts.left[static_cast<std::size_t>(data.class_labels[i])] += 1;
                counts.right[static_cast<std::size_t>(data.class_labels[i])] -= 1;
                const double lo = col.numeric[i];
                const double hi = col.numeric[present[p + 1]];
                if (lo == hi) continue;  // thresholds sit between distinct values only
                const double gain = counts.gain(parent_entropy);
                if (gain > best_gain) {
                    best_gain = gain;
                    model.attribute = static_cast<int>(a);
                    model.threshold = lo + (hi - lo) / 2.0;
                    model.nominal_value = -1;
                    model.gain = gain;
                    model.left = laplace_distribution(counts.left);
                    model.right = laplace_distribution(counts.right);
                }
            }
        } else {
            for (std::size_t v = 0; v < col.labels.size(); ++v) {
                SplitCounts counts{std::vector<long>(k, 0), std::vector<long>(k, 0)};
                for (std::size_t i : present) {
                    auto& side =
                        col.nominal[i] == static_cast<int>(v) ? counts.left : counts.right;
                    side[static_cast<std::size_t>(data.class_labels[i])] += 1;
                }
                const double gain = counts.gain(parent_entropy);
                if (gain > best_gain) {
                    best_gain = gain;
                    model.attribute = static_cast<int>(a);
                    model.nominal_value = static_cast<int>(v);
                    model.threshold = 0.0;
                    model.gain = gain;
                    model.left = laplace_distribution(counts.left);
                    model.right = laplace_distribution(counts.right);
                }
            }
        }
    }
    return model;
}

ScoreMatrix predict_stump(const StumpModel& model, const TabularDataset& data, IndexSpan test) {
    const std::size_t k = data.n_classes();
    ScoreMatrix scores(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(k));
    for (std::size_t t = 0; t < test.size(); ++t) {
        const std::size_t i = test[t];
        const std::vector<double>* dist = &model.fallback;
        if (model.attribute >= 0) {
            const DataColumn& col = data.predictors[static_cast<std::size_t>(model.attribute)];
            if (!col.missing(i)) {
                const bool left = col.kind == ColumnKind::numeric
                                      ? col.numeric[i] <= model.threshold
                                      : col.nominal[i] == model.nominal_value;
                dist = left ? &model.left : &model.right;
            }
        }
        for (std::size_t c = 0; c < k; ++c)
            scores(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = (*dist)[c];
    }
    return scores;
}

std::unique_ptr<Learner> make_learner(const std::string& learner_id) {
    if (learner_id == "zeror") return std::make_unique<ZeroRLearner>();
    if (learner_id == "stump") return std::make_unique<StumpLearner>();
    if (learner_id == "naive_bayes") return std::make_unique<NaiveBayesLearner>();
    if (learner_id == "hyperpipes") return std::make_unique<HyperPipesLearner>();
    throw Error(ErrorKind::argument, "unknown learner '" + learner_id + "'");
}

const std::vector<std::string>& learner_ids() {
    static const std::vector<std::string> ids = {"zeror", "stump", "naive_bayes", "hyperpipes"};
    return ids;
}

ScoreMatrix train_predict(const std::string& learner_id, const TabularDataset& data,
                          IndexSpan train, IndexSpan test) {
    auto learner = make_learner(learner_id);
    learner->fit(data, train);
    return learner->predict(data, test);
}

ScoreMatrix train_predict_zeror(const TabularDataset& data, IndexSpan train, IndexSpan test) {
    return train_predict("zeror", data, train, test);
}

ScoreMatrix train_predict_stump(const TabularDataset& data, IndexSpan train, IndexSpan test) {
    return train_predict("stump", data, train, test);
}

ScoreMatrix train_predict_naive_bayes(const TabularDataset& data, IndexSpan train,
                                      IndexSpan test) {
    return train_predict("naive_bayes", data, train, test);
}

ScoreMatrix train_predict_hyperpipes(const TabularDataset& data, IndexSpan train,
                                     IndexSpan test) {
    return train_predict("hyperpipes", data, train, test);
}

// ---------------------------------------------------------------------------
// metrics

double auc_binary(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorKind::argument, "auc_binary: scores and labels differ in length");
    long n_pos = 0, n_neg = 0;
    for (int label : labels) (label != 0 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0)
        throw Error(ErrorKind::metric, "auc_binary: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]] != 0) rank_sum_pos += midrank;
        i = j + 1;
    }
    const double u =
        rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auc_multiclass_ova(const ScoreMatrix& scores, std::span<const int> labels,
                          bool weight_by_prevalence) {
    if (static_cast<std::size_t>(scores.rows()) != labels.size())
        throw Error(ErrorKind::argument, "auc_multiclass_ova: shape mismatch");
    std::vector<long> counts(static_cast<std::size_t>(scores.cols()), 0);
    for (int label : labels) {
        if (label < 0 || label >= scores.cols())
            throw Error(ErrorKind::argument, "auc_multiclass_ova: label out of range");
        counts[static_cast<std::size_t>(label)] += 1;
    }
    long present = 0;
    for (long c : counts) present += c > 0 ? 1 : 0;
    if (present < 2)
        throw Error(ErrorKind::metric, "auc_multiclass_ova: need at least 2 classes present");

    std::vector<double> column(labels.size());
    std::vector<int> indicator(labels.size());
    double sum = 0.0, weight_sum = 0.0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) continue;
        for (std::size_t r = 0; r < labels.size(); ++r) {
            column[r] = scores(static_cast<Eigen::Index>(r), c);
            indicator[r] = labels[r] == static_cast<int>(c) ? 1 : 0;
        }
        const double auc = auc_binary(column, indicator);
        const double weight = weight_by_prevalence
                                  ? static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                                        static_cast<double>(labels.size())
                                  : 1.0;
        sum += weight * auc;
        weight_sum += weight;
    }
    return sum / weight_sum;
}

// ---------------------------------------------------------------------------
// metering

namespace {

double monotonic_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::vector<std::vector<std::size_t>> stratified_folds(const TabularDataset& data, int k,
                                                       std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> by_class(data.n_classes());
    for (std::size_t i = 0; i < data.n_rows(); ++i)
        by_class[static_cast<std::size_t>(data.class_labels[i])].push_back(i);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    Rng rng(seed);
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i)
            folds[i % static_cast<std::size_t>(k)].push_back(members[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

std::vector<Split> protocol_splits(const TabularDataset& data, const EvalProtocol& protocol,
                                   std::uint64_t seed) {
    std::vector<Split> splits;
    if (protocol.kind == EvalProtocol::Kind::cross_validation) {
        if (protocol.folds < 2)
            throw Error(ErrorKind::protocol, "cross-validation needs at least 2 folds");
        if (static_cast<std::size_t>(protocol.folds) > data.n_rows())
            throw Error(ErrorKind::protocol, "more folds than instances");
        const auto folds = stratified_folds(data, protocol.folds, seed);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            Split split;
            split.test = folds[f];
            for (std::size_t g = 0; g < folds.size(); ++g)
                if (g != f)
                    split.train.insert(split.train.end(), folds[g].begin(), folds[g].end());
            std::sort(split.train.begin(), split.train.end());
            splits.push_back(std::move(split));
        }
    } else {
        if (!(protocol.holdout_fraction > 0.0 && protocol.holdout_fraction < 1.0))
            throw Error(ErrorKind::protocol, "holdout fraction must be in (0, 1)");
        std::vector<std::vector<std::size_t>> by_class(data.n_classes());
        for (std::size_t i = 0; i < data.n_rows(); ++i)
            by_class[static_cast<std::size_t>(data.class_labels[i])].push_back(i);
        Split split;
        Rng rng(seed);
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            auto& members = by_class[c];
            if (members.empty()) continue;
            if (members.size() < 2)
                throw Error(ErrorKind::protocol,
                            "class '" + data.class_names[c] +
                                "' has a single instance; holdout cannot cover both splits");
            rng.shuffle(members);
            std::size_t n_test = static_cast<std::size_t>(
                std::lround(protocol.holdout_fraction * static_cast<double>(members.size())));
            n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
            for (std::size_t i = 0; i < members.size(); ++i)
                (i < n_test ? split.test : split.train).push_back(members[i]);
        }
        std::sort(split.train.begin(), split.train.end());
        std::sort(split.test.begin(), split.test.end());
        splits.push_back(std::move(split));
    }

    for (std::size_t s = 0; s < splits.size(); ++s) {
        std::vector<bool> seen(data.n_classes(), false);
        for (std::size_t i : splits[s].train)
            seen[static_cast<std::size_t>(data.class_labels[i])] = true;
        for (std::size_t c = 0; c < seen.size(); ++c) {
            if (!seen[c])
                throw Error(ErrorKind::protocol,
                            "fold " + std::to_string(s + 1) + " training split lacks class '" +
                                data.class_names[c] + "'; use fewer folds");
        }
    }
    return splits;
}

}  // namespace

MeteredEval metered_evaluate(const std::string& learner_id, const TabularDataset& data,
                             const EvalProtocol& protocol, std::uint64_t seed) {
    const auto splits = protocol_splits(data, protocol, seed);
    auto learner = make_learner(learner_id);

    ScoreMatrix pooled(static_cast<Eigen::Index>(data.n_rows()),
                       static_cast<Eigen::Index>(data.n_classes()));
    std::vector<int> pooled_labels;
    double train_ms = 0.0, test_ms = 0.0;
    Eigen::Index pooled_at = 0;

    for (const auto& split : splits) {
        const double t0 = monotonic_ms();
        learner->fit(data, split.train);
        const double t1 = monotonic_ms();
        const ScoreMatrix scores = learner->predict(data, split.test);
        const double t2 = monotonic_ms();
        train_ms += t1 - t0;
        test_ms += t2 - t1;

        pooled.middleRows(pooled_at, scores.rows()) = scores;
        pooled_at += scores.rows();
        for (std::size_t i : split.test) pooled_labels.push_back(data.class_labels[i]);
    }

    MeteredEval eval;
    eval.algorithm_id = learner_id;
    eval.dataset_id = data.name;
    eval.train_ms = train_ms;
    eval.test_ms = test_ms;
    eval.auc = auc_multiclass_ova(pooled.topRows(pooled_at), pooled_labels);
    return eval;
}

MetaFeatures extract_meta_features(const TabularDataset& data) {
    MetaFeatures mf;
    mf.num_attributes = static_cast<long>(data.predictors.size());

    std::vector<long> class_counts(data.n_classes(), 0);
    for (int label : data.class_labels) class_counts[static_cast<std::size_t>(label)] += 1;
    mf.class_entropy = entropy_bits(class_counts);
    mf.majority_class_size = *std::max_element(class_counts.begin(), class_counts.end());

    mf.max_nominal_att_distinct_values = -1;
    for (const auto& col : data.predictors)
        if (col.kind == ColumnKind::nominal)
            mf.max_nominal_att_distinct_values =
                std::max(mf.max_nominal_att_distinct_values, static_cast<long>(col.labels.size()));

    EvalProtocol protocol;
    protocol.kind = EvalProtocol::Kind::cross_validation;
    protocol.folds = std::min<int>(10, static_cast<int>(data.n_rows()));
    mf.decision_stump_auc = metered_evaluate("stump", data, protocol, 0).auc;
    return mf;
}

std::string meta_features_csv_header() {
    return "dataset_id,num_attributes,class_entropy,max_nominal_att_distinct_values,"
           "majority_class_size,decision_stump_auc\n";
}

std::string meta_features_csv_row(const std::string& dataset_id, const MetaFeatures& mf) {
    return dataset_id + "," + std::to_string(mf.num_attributes) + "," +
           fmt_double(mf.class_entropy) + "," +
           std::to_string(mf.max_nominal_att_distinct_values) + "," +
           std::to_string(mf.majority_class_size) + "," + fmt_double(mf.decision_stump_auc) +
           "\n";
}

}  // namespace frugal
