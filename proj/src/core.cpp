#include "bucket/core.hpp"

#include <array>
#include <cmath>
#include <utility>

#include <fmt/format.h>

namespace bucket {

const char* to_string(DataErrorKind kind) noexcept {
    switch (kind) {
        case DataErrorKind::generic: return "data error";
        case DataErrorKind::parse: return "parse error";
        case DataErrorKind::dimension_mismatch: return "dimension mismatch";
        case DataErrorKind::duplicate_id: return "duplicate id";
        case DataErrorKind::unknown_label: return "unknown label";
        case DataErrorKind::non_finite: return "non-finite value";
        case DataErrorKind::id_set_mismatch: return "id set mismatch";
        case DataErrorKind::single_class: return "single class";
        case DataErrorKind::training: return "training error";
    }
    return "data error";
}

Label label_from_int(int v) {
    if (v == 1) return Label::positive;
    if (v == -1) return Label::negative;
    throw DataError(DataErrorKind::unknown_label, fmt::format("label must be -1 or +1, got {}", v));
}

FeatureMatrix::FeatureMatrix(std::string name, std::size_t rows, std::size_t cols,
                             std::vector<double> values)
    : name_(std::move(name)), rows_(rows), cols_(cols), values_(std::move(values)) {
    if (cols_ == 0) {
        throw DataError(DataErrorKind::dimension_mismatch,
                        fmt::format("feature set '{}' has zero columns", name_));
    }
    if (values_.size() != rows_ * cols_) {
        throw DataError(DataErrorKind::dimension_mismatch,
                        fmt::format("feature set '{}': {} values for a {}x{} matrix", name_,
                                    values_.size(), rows_, cols_));
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) {
            throw DataError(DataErrorKind::non_finite,
                            fmt::format("feature set '{}': non-finite value at row {}, column {}",
                                        name_, k / cols_, k % cols_));
        }
    }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * cols_);
    for (std::size_t i : indices) {
        if (i >= rows_) throw ContractViolation("select_rows: row index out of range");
        auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    FeatureMatrix m;
    m.name_ = name_;
    m.rows_ = indices.size();
    m.cols_ = cols_;
    m.values_ = std::move(out);
    return m;
}

std::optional<std::size_t> known_layer_width(std::string_view name) {
    static constexpr std::array<std::pair<std::string_view, std::size_t>, 4> widths{{
        {"fc7", 4096},
        {"pool5-7x7_s1", 1024},
        {"pool5", 512},
        {"avg_pool", 2048},
    }};
    if (auto slash = name.rfind('/'); slash != std::string_view::npos) {
        name = name.substr(slash + 1);
    }
    for (const auto& [layer, width] : widths) {
        if (name == layer) return width;
    }
    return std::nullopt;
}

std::vector<std::size_t> LabeledDataset::original_rows() const {
    std::vector<std::size_t> rows;
    rows.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
        if (!is_augmented(i)) rows.push_back(i);
    }
    return rows;
}

void LabeledDataset::validate() const {
    if (labels.size() != ids.size()) {
        throw DataError(DataErrorKind::dimension_mismatch,
                        fmt::format("{} labels for {} ids", labels.size(), ids.size()));
    }
    if (views.empty()) throw DataError(DataErrorKind::dimension_mismatch, "dataset has no feature views");
    for (const auto& v : views) {
        if (v.rows() != ids.size()) {
            throw DataError(DataErrorKind::dimension_mismatch,
                            fmt::format("view '{}' has {} rows, expected {}", v.name(), v.rows(),
                                        ids.size()));
        }
    }
    for (Label l : labels) {
        if (l != Label::positive && l != Label::negative) {
            throw DataError(DataErrorKind::unknown_label, "labels must be -1 or +1");
        }
    }
    if (!augmented_from.empty()) {
        if (augmented_from.size() != ids.size()) {
            throw DataError(DataErrorKind::dimension_mismatch, "augmentation map does not cover every row");
        }
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!augmented_from[i]) continue;
            std::size_t src = *augmented_from[i];
            if (src >= ids.size() || augmented_from[src]) {
                throw DataError(fmt::format("augmented row '{}' must point at an original row", ids[i]));
            }
            if (labels[src] != labels[i]) {
                throw DataError(fmt::format("augmented row '{}' has a different label than its source",
                                            ids[i]));
            }
        }
    }
}

void require_both_classes(std::span<const Label> labels, std::string_view context) {
    bool pos = false;
    bool neg = false;
    for (Label l : labels) {
        pos |= l == Label::positive;
        neg |= l == Label::negative;
    }
    if (!pos || !neg) {
        throw DataError(DataErrorKind::single_class,
                        fmt::format("{}: both classes must be present", context));
    }
}

}  // namespace bucket
