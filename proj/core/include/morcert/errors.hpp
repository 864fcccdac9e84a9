// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_ERRORS_HPP
#define MORCERT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace morcert
{

// Base class for every error raised by the library. Each subclass maps onto a
// distinct process exit code in the command line tool (see tools/).
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// A factorization found no usable pivot, or a solve produced non-finite
// values. For frequency sweeps this typically means the sample sits exactly
// on a resonance of the operator.
class SingularMatrix : public Error
{
public:
  using Error::Error;
};

// Every candidate column of an orthonormalization fell below the drop
// tolerance, so no basis could be formed.
class EmptyBasis : public Error
{
public:
  using Error::Error;
};

// A dense decomposition (SVD) was requested for a matrix above the
// configured dimension cap.
class DimensionTooLarge : public Error
{
public:
  using Error::Error;
};

// Operands with incompatible shapes, or an empty operand where a nonempty
// one is required.
class DimensionMismatch : public Error
{
public:
  using Error::Error;
};

// A benchmark spec, configuration file, or bundle manifest failed
// validation before any numerical work started.
class InvalidSpec : public Error
{
public:
  using Error::Error;
};

// A parameter grid unusable for the requested operation (fewer than two
// distinct points where two sample streams must be kept distinct).
class DegenerateGrid : public Error
{
public:
  using Error::Error;
};

// File system or serialization failure (missing file, malformed matrix
// file, unwritable output directory).
class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace morcert

#endif // MORCERT_ERRORS_HPP
