#pragma once

#include <stdexcept>
#include <string>

namespace txadapt {

// Invalid or inconsistent configuration values. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A pipeline stage could not run or produce its outputs. CLI maps this to exit code 2.
class StageError : public std::runtime_error {
public:
    explicit StageError(const std::string& what) : std::runtime_error(what) {}
};

// Requested statistic is undefined for the given inputs
// (e.g. an outage quantile with U*epsilon < 1, or a DVP over zero slots).
class UndefinedStatisticError : public std::runtime_error {
public:
    explicit UndefinedStatisticError(const std::string& what) : std::runtime_error(what) {}
};

// Kernel matrix stayed non-positive-definite after jitter escalation.
class IllConditionedKernelError : public std::runtime_error {
public:
    explicit IllConditionedKernelError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unreadable artifact file (dataset, table, checkpoint, ...).
class FileFormatError : public std::runtime_error {
public:
    explicit FileFormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace txadapt
