#pragma once

#include <stdexcept>
#include <string>

namespace aurk {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record or data file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A landmark configuration produced a zero-area basic RoI.
class DegenerateRegionError : public Error {
 public:
  DegenerateRegionError(int roi_no, const std::string& what)
      : Error(what), roi_no_(roi_no) {}
  int roi_no() const noexcept { return roi_no_; }

 private:
  int roi_no_;
};

class MissingRegionError : public Error {
 public:
  using Error::Error;
};

class EmptyMaskError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// Tensor, matrix or stream dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN or otherwise unusable numeric input.
class NumericError : public Error {
 public:
  using Error::Error;
};

class InsufficientFramesError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint, cache entry or data file written for a different profile/version.
class VersionError : public Error {
 public:
  using Error::Error;
};

/// Training was started before `aurk partition` populated the mask cache.
class CacheMissError : public Error {
 public:
  using Error::Error;
};

}  // namespace aurk
