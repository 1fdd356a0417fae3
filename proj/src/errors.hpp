#pragma once

#include <stdexcept>
#include <string>

namespace revcast {

// Error categories map 1:1 onto the C API status codes and CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

// Precondition failures on series length (STL fits, forecaster history).
class InsufficientHistoryError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

} // namespace revcast
