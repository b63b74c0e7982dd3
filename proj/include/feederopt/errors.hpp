#pragma once

#include <stdexcept>
#include <string>

namespace feederopt {

// Base type for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters, bases, dimensions or run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or incomplete input tables (CSV schema, missing hours, bad cells).
class SchemaError : public Error {
public:
    using Error::Error;
};

// Network is not a tree rooted at the slack bus.
class TopologyError : public Error {
public:
    using Error::Error;
};

// Filesystem failures while reading datasets or writing reports.
class IoError : public Error {
public:
    using Error::Error;
};

// Load flow drove a bus voltage below the collapse floor.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

} // namespace feederopt
