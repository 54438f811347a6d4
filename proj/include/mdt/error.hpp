#pragma once

#include <stdexcept>
#include <string>

namespace mdt {

struct invalid_argument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct bounds_error : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct not_found : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition that the structure can detect.
struct contract_violation : std::logic_error {
    using std::logic_error::logic_error;
};

struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Serialized artifact has a bad magic, version or inconsistent payload.
struct corrupt_artifact : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct encoding_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mdt
