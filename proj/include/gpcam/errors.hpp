#pragma once

#include <stdexcept>
#include <string>

namespace gpcam {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// gp_regression
class FactorizationFailure : public Error {
public:
  using Error::Error;
};
class OptimizationDiverged : public Error {
public:
  using Error::Error;
};

// virtual_camera
class InsufficientCorners : public Error {
public:
  using Error::Error;
};
class DegenerateGrid : public Error {
public:
  using Error::Error;
};

// geometry
class DegenerateConfiguration : public Error {
public:
  using Error::Error;
};
class PointAtInfinity : public Error {
public:
  using Error::Error;
};
class DegeneratePoints : public Error {
public:
  using Error::Error;
};
class NoConsensus : public Error {
public:
  using Error::Error;
};

// calibration
class NotPositiveDefinite : public Error {
public:
  using Error::Error;
};
class InsufficientBoards : public Error {
public:
  using Error::Error;
};
class NonPhysicalSolution : public Error {
public:
  using Error::Error;
};
class BehindCamera : public Error {
public:
  using Error::Error;
};

// synth
class NonInjectiveWarp : public Error {
public:
  using Error::Error;
};

// undistort / io
class EmptyOutput : public Error {
public:
  using Error::Error;
};
class IoError : public Error {
public:
  using Error::Error;
};

// cli / file formats
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace gpcam
