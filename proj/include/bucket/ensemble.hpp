#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bucket/core.hpp"

namespace bucket {

/// Per-image decision and score grids. Rows are classifiers, columns are
/// feature sets; both stored row-major.
class DecisionRecord {
public:
    DecisionRecord(std::size_t classifiers, std::size_t feature_sets);
    /// Throws ContractViolation when the sizes do not match the shape or an entry is out of range.
    DecisionRecord(std::size_t classifiers, std::size_t feature_sets, std::vector<Label> decisions,
                   std::vector<double> scores);

    std::size_t classifiers() const noexcept { return n_; }
    std::size_t feature_sets() const noexcept { return m_; }

    Label decision(std::size_t c, std::size_t f) const { return d_[c * m_ + f]; }
    double score(std::size_t c, std::size_t f) const { return s_[c * m_ + f]; }
    void set(std::size_t c, std::size_t f, Label decision, double score);

    std::vector<Label> decision_column(std::size_t f) const;
    std::vector<double> score_column(std::size_t f) const;

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<Label> d_;
    std::vector<double> s_;
};

struct ColumnMode {
    Label modal = Label::positive;
    std::vector<std::size_t> agree_indices;
    double mean_score = 0.0;
};

/// Most frequent label of one column, the positions that hold it, and the mean
/// of their scores. Frequency ties resolve per `tie_break`: prefer_positive
/// returns +1, lowest_index returns the label at position 0.
ColumnMode column_mode(std::span<const Label> decisions, std::span<const double> scores, TieBreak tie_break);

struct FusionOutcome {
    std::vector<Label> dm;
    std::vector<double> ds;
    std::size_t chosen_column = 0;
    Label final = Label::positive;
    double final_score = 0.0;
};

/// Modal decision per column, then the decision of the column whose mean
/// agreeing score is largest (lowest column index on ties).
FusionOutcome fuse(const DecisionRecord& record, TieBreak tie_break);

}  // namespace bucket
