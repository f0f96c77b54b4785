#include "bucket/ensemble.hpp"

#include <fmt/format.h>

namespace bucket {

DecisionRecord::DecisionRecord(std::size_t classifiers, std::size_t feature_sets)
    : n_(classifiers),
      m_(feature_sets),
      d_(classifiers * feature_sets, Label::positive),
      s_(classifiers * feature_sets, 0.5) {
    if (n_ == 0 || m_ == 0) throw ContractViolation("decision record needs at least one classifier and feature set");
}

DecisionRecord::DecisionRecord(std::size_t classifiers, std::size_t feature_sets, std::vector<Label> decisions,
                               std::vector<double> scores)
    : n_(classifiers), m_(feature_sets), d_(std::move(decisions)), s_(std::move(scores)) {
    if (n_ == 0 || m_ == 0) throw ContractViolation("decision record needs at least one classifier and feature set");
    if (d_.size() != n_ * m_ || s_.size() != n_ * m_) {
        throw ContractViolation(fmt::format("decision record shape mismatch: D has {}, S has {}, expected {}x{}",
                                            d_.size(), s_.size(), n_, m_));
    }
    for (std::size_t k = 0; k < s_.size(); ++k) {
        if (d_[k] != Label::positive && d_[k] != Label::negative) {
            throw ContractViolation("decision entries must be -1 or +1");
        }
        if (!(s_[k] >= 0.0 && s_[k] <= 1.0)) throw ContractViolation("score entries must lie in [0, 1]");
    }
}

void DecisionRecord::set(std::size_t c, std::size_t f, Label decision, double score) {
    if (c >= n_ || f >= m_) throw ContractViolation("decision record index out of range");
    if (!(score >= 0.0 && score <= 1.0)) throw ContractViolation("score entries must lie in [0, 1]");
    d_[c * m_ + f] = decision;
    s_[c * m_ + f] = score;
}

std::vector<Label> DecisionRecord::decision_column(std::size_t f) const {
    std::vector<Label> col(n_);
    for (std::size_t c = 0; c < n_; ++c) col[c] = decision(c, f);
    return col;
}

std::vector<double> DecisionRecord::score_column(std::size_t f) const {
    std::vector<double> col(n_);
    for (std::size_t c = 0; c < n_; ++c) col[c] = score(c, f);
    return col;
}

ColumnMode column_mode(std::span<const Label> decisions, std::span<const double> scores, TieBreak tie_break) {
    if (decisions.empty()) throw ContractViolation("column_mode: empty column");
    if (decisions.size() != scores.size()) throw ContractViolation("column_mode: decision/score length mismatch");

    std::size_t positives = 0;
    for (Label l : decisions) positives += l == Label::positive ? 1 : 0;
    const std::size_t negatives = decisions.size() - positives;

    ColumnMode out;
    if (positives != negatives) {
        out.modal = positives > negatives ? Label::positive : Label::negative;
    } else {
        out.modal = tie_break == TieBreak::prefer_positive ? Label::positive : decisions.front();
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (decisions[i] == out.modal) {
            out.agree_indices.push_back(i);
            sum += scores[i];
        }
    }
    out.mean_score = sum / static_cast<double>(out.agree_indices.size());
    return out;
}

FusionOutcome fuse(const DecisionRecord& record, TieBreak tie_break) {
    FusionOutcome out;
    const std::size_t m = record.feature_sets();
    out.dm.reserve(m);
    out.ds.reserve(m);
    for (std::size_t f = 0; f < m; ++f) {
        auto mode = column_mode(record.decision_column(f), record.score_column(f), tie_break);
        out.dm.push_back(mode.modal);
        out.ds.push_back(mode.mean_score);
    }
    for (std::size_t f = 1; f < m; ++f) {
        if (out.ds[f] > out.ds[out.chosen_column]) out.chosen_column = f;
    }
    out.final = out.dm[out.chosen_column];
    out.final_score = out.ds[out.chosen_column];
    return out;
}

}  // namespace bucket
