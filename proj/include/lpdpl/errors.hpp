#ifndef LPDPL_ERRORS_HPP
#define LPDPL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lpdpl {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Preprocessing found no foreground pixel to crop around.
class EmptyGlyph : public Error {
public:
  using Error::Error;
};

// A dense factorization failed; the linear system is numerically singular.
class SingularSystem : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

// Subject or repetition metadata required by a fold scheme is absent.
class MissingMetadata : public Error {
public:
  using Error::Error;
};

class DecodeError : public Error {
public:
  using Error::Error;
};

class ManifestError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class CorruptModel : public Error {
public:
  using Error::Error;
};

class VersionMismatch : public Error {
public:
  using Error::Error;
};

} // namespace lpdpl

#endif
