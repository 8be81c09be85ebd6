#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParams : public Error { public: using Error::Error; };
class DivisionByZero : public Error { public: using Error::Error; };
class SingularMatrix : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class NoSolution : public Error { public: using Error::Error; };
class DofExceeded : public Error { public: using Error::Error; };
class PolicyNotApplicable : public Error { public: using Error::Error; };
class ResampleExhausted : public Error { public: using Error::Error; };
class WindowError : public Error { public: using Error::Error; };
class NotApplicable : public Error { public: using Error::Error; };
class NotCovered : public Error { public: using Error::Error; };
class CapacityExceeded : public Error { public: using Error::Error; };
class AcyclicGraph : public Error { public: using Error::Error; };

}  // namespace aoi
