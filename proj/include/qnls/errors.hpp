#pragma once

#include <stdexcept>
#include <string>

namespace qnls {

// Bad input: configuration, parameters, shapes. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values, stability-guard rejections, blown-up runs. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qnls
