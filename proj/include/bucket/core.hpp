#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bucket/errors.hpp"

namespace bucket {

/// Binary class label. +1 is melanoma, -1 is not-melanoma.
enum class Label : int { negative = -1, positive = 1 };

constexpr int to_int(Label l) noexcept { return static_cast<int>(l); }
constexpr Label opposite(Label l) noexcept {
    return l == Label::positive ? Label::negative : Label::positive;
}
Label label_from_int(int v);

/// Dense row-major matrix holding one feature set: row i is the feature vector of image i.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    /// Throws DataError when values.size() != rows*cols, cols == 0, or a value is non-finite.
    FeatureMatrix(std::string name, std::size_t rows, std::size_t cols, std::vector<double> values);

    const std::string& name() const noexcept { return name_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols_, cols_};
    }
    double at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    std::span<const double> values() const noexcept { return values_; }

    /// Rows in the given order; indices may repeat.
    FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

private:
    std::string name_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Known layer widths of the supported feature layers, looked up by the last
/// '/'-separated component of a feature-set name.
std::optional<std::size_t> known_layer_width(std::string_view feature_set_name);

/// Images, labels and m aligned feature views.
///
/// Rows may be augmented copies of other rows (see `augmented_from`); those
/// rows are only ever used for training, and only when their source row is
/// in the training split.
struct LabeledDataset {
    std::vector<std::string> ids;
    std::vector<Label> labels;
    std::vector<FeatureMatrix> views;
    /// Empty, or one entry per row: the source row index for augmented rows.
    std::vector<std::optional<std::size_t>> augmented_from;

    std::size_t size() const noexcept { return ids.size(); }
    bool is_augmented(std::size_t row) const {
        return !augmented_from.empty() && augmented_from[row].has_value();
    }
    /// Indices of original (non-augmented) rows, ascending.
    std::vector<std::size_t> original_rows() const;

    /// Throws DataError when the shape or label invariants fail.
    void validate() const;
};

/// Checks that labels hold both classes; throws DataError(single_class) otherwise.
void require_both_classes(std::span<const Label> labels, std::string_view context);

enum class TieBreak { prefer_positive, lowest_index };

}  // namespace bucket
