#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ssg/schema.hpp"

namespace ssg::model {
class SsgModel;
struct TaskSpec;
}  // namespace ssg::model

namespace ssg::eval {

struct APResult {
    double ap = 0;
    bool defined = false;  // false when the label has no positive example
    int positives = 0;
};

// Non-interpolated average precision: mean of precision-at-rank over the
// positive examples, ranking by descending score with ties kept in input
// order. Labels without positives yield an undefined result.
APResult average_precision(std::span<const double> scores, std::span<const int> labels);

struct MetricsReport {
    std::string task;
    std::string split;
    std::vector<std::string> label_names;
    std::vector<APResult> per_label;
    double map = 0;          // mean over labels with at least one positive
    int defined_labels = 0;
    int frames = 0;

    std::vector<std::string> undefined_label_names() const;
    // Rows "label,ap,positives"; undefined APs print as NA.
    std::string to_csv() const;
};

// Per-label AP over a frames x labels score/label matrix. Labels without
// positives are excluded from the mean and flagged in the report.
MetricsReport map_multilabel(const std::vector<std::vector<double>>& scores,
                             const std::vector<std::vector<int>>& labels,
                             const std::vector<std::string>& label_names,
                             const std::string& task, const std::string& split);

// Deterministic inference over a split with a trained task model.
// Frames without a label for the task are skipped. Throws on an empty split
// or a catalog mismatch between model and dataset.
MetricsReport evaluate(model::SsgModel& m, const model::TaskSpec& spec,
                       const schema::Dataset& dataset, const std::string& split);

// Same evaluation driven by an arbitrary scorer, for oracle tests and
// baselines such as a ground-truth echo.
MetricsReport evaluate_with_scorer(
    const std::function<std::vector<double>(const schema::FrameAnnotation&)>& scorer,
    const model::TaskSpec& spec, const schema::Dataset& dataset, const std::string& split);

}  // namespace ssg::eval
