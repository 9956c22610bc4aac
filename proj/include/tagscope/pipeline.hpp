#pragma once

#include <map>
#include <string>
#include <vector>

#include "tagscope/gbdt.hpp"
#include "tagscope/tabular.hpp"

namespace tagscope::pipeline {

inline std::map<std::string, std::size_t> index_by_id(const std::vector<tabular::FeatureVector>& rows) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < rows.size(); ++i) idx[rows[i].track_id] = i;
    return idx;
}

// Restrict a label matrix to the ids present in the feature store, keeping
// the tag vocabulary.
inline tabular::LabelMatrix restrict_labels(const tabular::LabelMatrix& labels,
                                            const std::vector<tabular::FeatureVector>& rows) {
    const auto idx = index_by_id(rows);
    tabular::LabelMatrix out;
    out.task_kind = labels.task_kind;
    out.tag_names = labels.tag_names;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < labels.track_ids.size(); ++i)
        if (idx.count(labels.track_ids[i])) keep.push_back(i);
    out.track_ids.reserve(keep.size());
    out.indicators = Matrix(keep.size(), labels.tag_names.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.track_ids.push_back(labels.track_ids[keep[k]]);
        for (std::size_t t = 0; t < labels.tag_names.size(); ++t)
            out.indicators.at(k, t) = labels.indicators.at(keep[k], t);
    }
    return out;
}

// Feature matrix and aligned labels for a list of track ids, optionally
// restricted to a column subset.
struct Part {
    Matrix x;  // raw, unscaled
    tabular::LabelMatrix y;
};

inline Part materialize(const std::vector<tabular::FeatureVector>& rows,
                        const tabular::LabelMatrix& labels, const std::vector<std::string>& ids,
                        const std::vector<std::size_t>& columns) {
    const auto row_idx = index_by_id(rows);
    std::map<std::string, std::size_t> label_idx;
    for (std::size_t i = 0; i < labels.track_ids.size(); ++i) label_idx[labels.track_ids[i]] = i;

    Part part;
    part.y.task_kind = labels.task_kind;
    part.y.tag_names = labels.tag_names;
    part.x = Matrix(ids.size(), columns.size());
    part.y.indicators = Matrix(ids.size(), labels.tag_names.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto r = row_idx.find(ids[i]);
        const auto l = label_idx.find(ids[i]);
        if (r == row_idx.end()) throw Error("track not in feature store: " + ids[i]);
        if (l == label_idx.end()) throw Error("track not in labels: " + ids[i]);
        for (std::size_t c = 0; c < columns.size(); ++c)
            part.x.at(i, c) = rows[r->second].values[columns[c]];
        for (std::size_t t = 0; t < labels.tag_names.size(); ++t)
            part.y.indicators.at(i, t) = labels.indicators.at(l->second, t);
        part.y.track_ids.push_back(ids[i]);
    }
    return part;
}

inline std::vector<std::size_t> all_columns(std::size_t d) {
    std::vector<std::size_t> cols(d);
    for (std::size_t i = 0; i < d; ++i) cols[i] = i;
    return cols;
}

// Fit the scaler on the train split, train one booster per label on the
// scaled columns, and record scaler + split in the model.
inline gbdt::BoostedModel train_on_split(const std::vector<tabular::FeatureVector>& rows,
                                         const tabular::LabelMatrix& labels,
                                         const tabular::SplitSpec& split,
                                         const gbdt::TrainParams& params,
                                         const std::vector<std::size_t>& columns,
                                         const std::vector<std::string>& column_names, int jobs = 1,
                                         gbdt::TrainReport* report_out = nullptr) {
    Part train_part = materialize(rows, labels, split.train, columns);

    std::vector<tabular::FeatureVector> train_rows(train_part.x.rows);
    for (std::size_t i = 0; i < train_part.x.rows; ++i) {
        train_rows[i].track_id = train_part.y.track_ids[i];
        train_rows[i].values.assign(train_part.x.row(i), train_part.x.row(i) + train_part.x.cols);
    }
    tabular::StandardScaler scaler = tabular::fit_scaler(train_rows);

    Matrix x_scaled(train_part.x.rows, train_part.x.cols);
    for (std::size_t i = 0; i < train_part.x.rows; ++i) {
        const std::vector<double> z = scaler.transform(train_rows[i].values);
        for (std::size_t c = 0; c < z.size(); ++c) x_scaled.at(i, c) = z[c];
    }

    auto [model, report] = gbdt::train(x_scaled, train_part.y, params, column_names, jobs);
    model.scaler = std::move(scaler);
    model.split = split;
    if (report_out != nullptr) *report_out = std::move(report);
    return model;
}

// Evaluate a trained model on the given ids; features pass in raw and the
// model applies its own scaler.
inline gbdt::Metrics evaluate_on(const gbdt::BoostedModel& model,
                                 const std::vector<tabular::FeatureVector>& rows,
                                 const tabular::LabelMatrix& labels,
                                 const std::vector<std::string>& ids,
                                 const std::vector<std::size_t>& columns) {
    const Part part = materialize(rows, labels, ids, columns);
    return gbdt::evaluate(model, part.x, part.y);
}

}  // namespace tagscope::pipeline
