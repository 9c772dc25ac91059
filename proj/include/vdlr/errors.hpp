#pragma once

#include <stdexcept>

namespace vdlr {

// Problems with user-supplied input: data files, configs, CLI arguments.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A sampler state that produced a non-finite log posterior.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vdlr
