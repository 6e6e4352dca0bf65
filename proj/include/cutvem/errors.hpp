#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cutvem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonSimplePolygon : public Error {
public:
    using Error::Error;
};

class NonManifoldEdge : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class InvalidMesh : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NotATriangulation : public Error {
public:
    using Error::Error;
};

class DegenerateCut : public Error {
public:
    using Error::Error;
};

class EmptyResult : public Error {
public:
    using Error::Error;
};

class SingularG : public Error {
public:
    using Error::Error;
};

class NegativeJacobian : public Error {
public:
    using Error::Error;
};

class UnexpectedNullSpace : public Error {
public:
    using Error::Error;
};

class NotSPD : public Error {
public:
    using Error::Error;
};

class TooManyNullModes : public Error {
public:
    using Error::Error;
};

class NoDirichlet : public Error {
public:
    using Error::Error;
};

class FemOnPolygon : public Error {
public:
    using Error::Error;
};

class NotConverged : public Error {
public:
    using Error::Error;
};

class UnknownPreset : public Error {
public:
    using Error::Error;
};

class EarClipFailure : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace cutvem
