#pragma once

#include <stdexcept>
#include <string>

namespace driftwatch {

/// Precondition violated (bad parameter, non-finite input, out-of-range index).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A statistic cannot be formed at a given index: kernel weights sum to zero
/// or a variance estimate vanished. `index` is 1-based, 0 when not applicable.
class DegenerateError : public std::runtime_error {
public:
    DegenerateError(const std::string& what, long index = 0)
        : std::runtime_error(what), index_(index) {}
    long index() const noexcept { return index_; }

private:
    long index_;
};

}  // namespace driftwatch
