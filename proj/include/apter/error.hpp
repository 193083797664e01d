#pragma once

#include <stdexcept>
#include <string>

namespace apter {

// Root of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data that cannot be used: malformed files, dimension mismatches,
// datasets without a single comparable pair.
class DataError : public Error {
public:
    using Error::Error;
};

// Parameter values outside their contract (nu <= 0, count > d, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

class NoComparablePairs : public DataError {
public:
    NoComparablePairs() : DataError("no comparable pairs") {}
};

}  // namespace apter
