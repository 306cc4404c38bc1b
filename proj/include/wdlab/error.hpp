#pragma once

#include <stdexcept>
#include <string>

namespace wdlab {

/// Raised for precondition violations and infeasible requests anywhere in the lab.
class LabError : public std::runtime_error {
public:
    explicit LabError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wdlab
