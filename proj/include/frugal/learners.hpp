#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "frugal/eval_data.hpp"
#include "frugal/error.hpp"

namespace frugal {

enum class ColumnKind { numeric, nominal };

struct DataColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> numeric;        // NaN = missing (numeric columns)
    std::vector<int> nominal;           // index into labels, -1 = missing
    std::vector<std::string> labels;    // sorted distinct nominal values

    bool missing(std::size_t row) const {
        return kind == ColumnKind::numeric ? std::isnan(numeric[row]) : nominal[row] < 0;
    }
};

struct TabularDataset {
    std::string name;
    std::vector<DataColumn> predictors;
    std::vector<int> class_labels;          // per row, index into class_names
    std::vector<std::string> class_names;   // sorted distinct

    std::size_t n_rows() const { return class_labels.size(); }
    std::size_t n_classes() const { return class_names.size(); }
};

// CSV with a header row; `?` or an empty cell denotes missing. A column is
// numeric iff every non-missing cell parses as a number; the class column is
// always nominal and must have at least two observed values.
TabularDataset load_dataset_csv(std::istream& in, const std::string& class_column,
                                const std::string& name);
TabularDataset load_dataset_csv_file(const std::string& path, const std::string& class_column);

using ScoreMatrix = Eigen::MatrixXd;  // n_test x n_classes
using IndexSpan = std::span<const std::size_t>;

// Majority-class baseline: every test instance receives the training
// class-frequency vector.
ScoreMatrix train_predict_zeror(const TabularDataset& data, IndexSpan train, IndexSpan test);

struct StumpModel {
    int attribute = -1;            // -1 when no informative split exists
    double threshold = 0.0;        // numeric split: x <= threshold goes left
    int nominal_value = -1;        // nominal split: x == value goes left
    double gain = 0.0;             // information gain of the chosen split
    std::vector<double> left;      // Laplace-smoothed leaf distributions
    std::vector<double> right;
    std::vector<double> fallback;  // root distribution, used for missing values
};

// Exhaustive 1-level decision tree maximising information gain; ties go to
// the lower attribute index, then the lower threshold / value index.
StumpModel fit_stump(const TabularDataset& data, IndexSpan train);
ScoreMatrix predict_stump(const StumpModel& model, const TabularDataset& data, IndexSpan test);
ScoreMatrix train_predict_stump(const TabularDataset& data, IndexSpan train, IndexSpan test);

// Gaussian likelihoods for numeric attributes (variance floor 1e-9),
// Laplace-smoothed frequencies for nominal ones, log-space accumulation.
ScoreMatrix train_predict_naive_bayes(const TabularDataset& data, IndexSpan train,
                                      IndexSpan test);

// Per class, the observed [min, max] per numeric attribute and value set per
// nominal attribute; an instance scores the fraction of its non-missing
// attributes inside each class's pipe.
ScoreMatrix train_predict_hyperpipes(const TabularDataset& data, IndexSpan train,
                                     IndexSpan test);

ScoreMatrix train_predict(const std::string& learner_id, const TabularDataset& data,
                          IndexSpan train, IndexSpan test);
const std::vector<std::string>& learner_ids();

// Two-phase interface behind the train_predict_* helpers; metering times the
// fit and predict calls separately.
class Learner {
public:
    virtual ~Learner() = default;
    virtual void fit(const TabularDataset& data, IndexSpan train) = 0;
    virtual ScoreMatrix predict(const TabularDataset& data, IndexSpan test) const = 0;
};

std::unique_ptr<Learner> make_learner(const std::string& learner_id);

// Mann-Whitney AUC with midranks for tied scores; labels are 0/1.
double auc_binary(std::span<const double> scores, std::span<const int> labels);

// Unweighted (or prevalence-weighted) mean of one-vs-all AUCs over the
// classes present in the labels.
double auc_multiclass_ova(const ScoreMatrix& scores, std::span<const int> labels,
                          bool weight_by_prevalence = false);

struct EvalProtocol {
    enum class Kind { holdout, cross_validation };
    Kind kind = Kind::cross_validation;
    int folds = 10;
    double holdout_fraction = 0.3;  // fraction held out for testing
};

struct MeteredEval {
    std::string algorithm_id;
    std::string dataset_id;
    double auc = 0.0;
    double train_ms = 0.0;
    double test_ms = 0.0;

    EvalRecord to_record() const { return {algorithm_id, dataset_id, auc, train_ms, test_ms}; }
};

// Stratified splits by seed; train/test wall times on a monotonic clock,
// AUC pooled over all held-out predictions.
MeteredEval metered_evaluate(const std::string& learner_id, const TabularDataset& data,
                             const EvalProtocol& protocol, std::uint64_t seed);

struct MetaFeatures {
    long num_attributes = 0;
    double class_entropy = 0.0;                  // bits
    long max_nominal_att_distinct_values = -1;   // -1 when no nominal predictor
    long majority_class_size = 0;
    double decision_stump_auc = 0.0;             // 10-fold CV landmarker, seed 0
};

MetaFeatures extract_meta_features(const TabularDataset& data);

std::string meta_features_csv_header();
std::string meta_features_csv_row(const std::string& dataset_id, const MetaFeatures& mf);

}  // namespace frugal
