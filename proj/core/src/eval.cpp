#include "ssg/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "ssg/model.hpp"

namespace ssg::eval {

APResult average_precision(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("average_precision: scores and labels differ in length");

    APResult res;
    for (int l : labels) res.positives += l != 0;
    if (res.positives == 0) return res;  // undefined, excluded from mAP

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double sum = 0;
    int hits = 0;
    for (size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] != 0) {
            hits += 1;
            sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    res.ap = sum / res.positives;
    res.defined = true;
    return res;
}

std::vector<std::string> MetricsReport::undefined_label_names() const {
    std::vector<std::string> out;
    for (size_t i = 0; i < per_label.size(); ++i)
        if (!per_label[i].defined) out.push_back(label_names[i]);
    return out;
}

std::string MetricsReport::to_csv() const {
    std::string csv = "label,ap,positives\n";
    char buf[64];
    for (size_t i = 0; i < per_label.size(); ++i) {
        csv += label_names[i];
        if (per_label[i].defined) {
            std::snprintf(buf, sizeof(buf), ",%.17g,", per_label[i].ap);
            csv += buf;
        } else {
            csv += ",NA,";
        }
        csv += std::to_string(per_label[i].positives);
        csv += "\n";
    }
    return csv;
}

MetricsReport map_multilabel(const std::vector<std::vector<double>>& scores,
                             const std::vector<std::vector<int>>& labels,
                             const std::vector<std::string>& label_names,
                             const std::string& task, const std::string& split) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("map_multilabel: score and label row counts differ");
    const size_t k = label_names.size();
    for (size_t i = 0; i < scores.size(); ++i)
        if (scores[i].size() != k || labels[i].size() != k)
            throw std::invalid_argument("map_multilabel: row width does not match label count");

    MetricsReport rep;
    rep.task = task;
    rep.split = split;
    rep.label_names = label_names;
    rep.frames = static_cast<int>(scores.size());

    double sum = 0;
    for (size_t j = 0; j < k; ++j) {
        std::vector<double> s(scores.size());
        std::vector<int> l(scores.size());
        for (size_t i = 0; i < scores.size(); ++i) {
            s[i] = scores[i][j];
            l[i] = labels[i][j];
        }
        const APResult ap = average_precision(s, l);
        rep.per_label.push_back(ap);
        if (ap.defined) {
            sum += ap.ap;
            rep.defined_labels += 1;
        }
    }
    rep.map = rep.defined_labels > 0 ? sum / rep.defined_labels : 0.0;
    return rep;
}

MetricsReport evaluate_with_scorer(
    const std::function<std::vector<double>(const schema::FrameAnnotation&)>& scorer,
    const model::TaskSpec& spec, const schema::Dataset& dataset, const std::string& split) {
    std::vector<std::vector<double>> scores;
    std::vector<std::vector<int>> labels;
    for (const auto* f : dataset.frames_in_split(split)) {
        const auto lab = model::frame_labels(spec, *f);
        if (!lab) continue;
        std::vector<double> s = scorer(*f);
        if (s.size() != lab->size())
            throw std::invalid_argument("evaluate: scorer width does not match label count");
        scores.push_back(std::move(s));
        std::vector<int> row(lab->size());
        for (size_t i = 0; i < row.size(); ++i) row[i] = (*lab)[i] > 0.5 ? 1 : 0;
        labels.push_back(std::move(row));
    }
    if (scores.empty())
        throw std::runtime_error("evaluate: split '" + split + "' has no labeled frames");
    return map_multilabel(scores, labels, spec.label_names, model::to_string(spec.task), split);
}

MetricsReport evaluate(model::SsgModel& m, const model::TaskSpec& spec,
                       const schema::Dataset& dataset, const std::string& split) {
    if (m.catalog_hash() != dataset.catalog.hash())
        throw std::runtime_error("evaluate: model catalog does not match dataset catalog");
    const auto provider = m.make_provider();
    return evaluate_with_scorer(
        [&](const schema::FrameAnnotation& f) {
            const auto pf = model::prepare_frame(f, dataset.catalog, provider, &spec);
            return m.task_scores(pf, spec);
        },
        spec, dataset, split);
}

}  // namespace ssg::eval
