#pragma once

#include <stdexcept>
#include <string>

namespace ulsad {

// Error taxonomy used across the library. The CLI maps these onto exit
// codes: config/shape/usage -> 1, data/persistence/metric/calibration -> 2,
// numeric -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct CalibrationError : Error {
    using Error::Error;
};

struct MetricError : Error {
    using Error::Error;
};

struct PersistenceError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

}  // namespace ulsad
