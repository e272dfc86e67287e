#pragma once

#include <stdexcept>
#include <string>

namespace iotsentry {

// Base error for everything the library throws on bad input or state.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace iotsentry
