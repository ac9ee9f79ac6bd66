#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lacunary {

// Raised when a computation would exceed its configured work budget.
class budget_exceeded : public std::runtime_error {
public:
    budget_exceeded(const std::string& what, std::uint64_t required, std::uint64_t budget)
        : std::runtime_error(what), required_(required), budget_(budget) {}

    std::uint64_t required() const noexcept { return required_; }
    std::uint64_t budget() const noexcept { return budget_; }

private:
    std::uint64_t required_;
    std::uint64_t budget_;
};

// The (N, d) combination admits no chaining decomposition or no feasible
// discrepancy method.
class infeasible_instance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lacunary
