#pragma once

#include <stdexcept>
#include <string>

namespace dartskill {

// Base class for everything this library throws on its own behalf.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied parameter violates a documented precondition
// (negative mass, release phase outside [0, 1], k < 1, ...).
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

// A computation left the numeric domain it is defined on: NaN/inf state,
// non-convergent eigensolve, singular kernel matrix past the ridge ceiling.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

// Geometry that cannot be resolved: a ray that never meets the room
// boundary, a release point outside the room.
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Malformed text input: CSV/JSON that does not parse, a skill container
// with missing fields or a wrong version.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure (cannot open / write a requested path).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dartskill
