#pragma once

#include <stdexcept>
#include <string>

namespace randsig {

/// Precondition violated by the caller (bad shape, bad parameter range).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a finite, trustworthy answer.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A metric is mathematically undefined for the given inputs.
class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised before an allocation that would exceed the configured memory budget.
class MemoryBudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw InvalidArgument(message);
}

}  // namespace randsig
