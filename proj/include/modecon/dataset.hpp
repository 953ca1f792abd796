#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "modecon/error.hpp"
#include "modecon/linalg.hpp"

namespace modecon {

// Inputs with regression targets, optionally with class labels. Classification data stores
// one-hot targets alongside the labels so that either loss can be evaluated.
struct LabeledDataset {
    std::vector<Vector> inputs;
    std::vector<Vector> targets;
    std::vector<std::size_t> labels;  // empty for regression
    std::string source;

    std::size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }
    bool has_labels() const { return !labels.empty(); }
    std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
    std::size_t target_dim() const { return targets.empty() ? 0 : targets.front().size(); }

    void validate() const {
        if (targets.size() != inputs.size())
            throw DimensionError("dataset: " + std::to_string(inputs.size()) + " inputs but " +
                                 std::to_string(targets.size()) + " targets");
        if (has_labels() && labels.size() != inputs.size())
            throw DimensionError("dataset: label count differs from input count");
        for (const auto& x : inputs)
            if (x.size() != input_dim()) throw DimensionError("dataset: ragged inputs");
        for (const auto& y : targets)
            if (y.size() != target_dim()) throw DimensionError("dataset: ragged targets");
        for (std::size_t c : labels)
            if (c >= target_dim()) throw DimensionError("dataset: label exceeds target dimension");
    }

    // The first n samples (or all of them when n >= size()).
    LabeledDataset head(std::size_t n) const {
        if (n >= size()) return *this;
        LabeledDataset out;
        out.inputs.assign(inputs.begin(), inputs.begin() + static_cast<std::ptrdiff_t>(n));
        out.targets.assign(targets.begin(), targets.begin() + static_cast<std::ptrdiff_t>(n));
        if (has_labels()) out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
        out.source = source;
        return out;
    }
};

inline LabeledDataset make_classification(std::vector<Vector> inputs, std::vector<std::size_t> labels,
                                          std::size_t classes, std::string source = {}) {
    LabeledDataset d;
    d.inputs = std::move(inputs);
    d.labels = std::move(labels);
    d.targets.reserve(d.labels.size());
    for (std::size_t c : d.labels) {
        if (c >= classes) throw ValidationError("label " + std::to_string(c) + " out of range");
        Vector y(classes, 0.0);
        y[c] = 1.0;
        d.targets.push_back(std::move(y));
    }
    d.source = std::move(source);
    d.validate();
    return d;
}

inline LabeledDataset make_regression(std::vector<Vector> inputs, std::vector<Vector> targets,
                                      std::string source = {}) {
    LabeledDataset d;
    d.inputs = std::move(inputs);
    d.targets = std::move(targets);
    d.source = std::move(source);
    d.validate();
    return d;
}

}  // namespace modecon
