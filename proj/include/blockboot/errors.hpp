#pragma once

#include <stdexcept>
#include <string>

namespace blockboot {

// Raised when two independent evaluation routes for the same quantity
// disagree beyond tolerance, or a numeric routine loses integrity
// (non-finite intermediate, degenerate normalization). Distinct from
// std::invalid_argument so callers can map it to a different exit path.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace blockboot
