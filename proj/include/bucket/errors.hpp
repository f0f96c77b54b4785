#pragma once

#include <stdexcept>
#include <string>

namespace bucket {

/// Kinds of data error, kept distinct so ingestion failures are reportable.
enum class DataErrorKind {
    generic,
    parse,
    dimension_mismatch,
    duplicate_id,
    unknown_label,
    non_finite,
    id_set_mismatch,
    single_class,
    training,
};

const char* to_string(DataErrorKind kind) noexcept;

/// Bad input data (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    DataError(DataErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    explicit DataError(const std::string& what)
        : DataError(DataErrorKind::generic, what) {}

    DataErrorKind kind() const noexcept { return kind_; }

private:
    DataErrorKind kind_;
};

/// A classifier could not be fitted. Carries the (classifier, feature-set) cell when known.
class TrainingError : public DataError {
public:
    explicit TrainingError(const std::string& what)
        : DataError(DataErrorKind::training, what) {}
};

/// Invalid configuration or parameters (CLI exit code 3).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace bucket
