// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MORCERT_IO_HPP
#define MORCERT_IO_HPP

#include <string>

#include "morcert/affine.hpp"
#include "morcert/estimators.hpp"
#include "morcert/greedy.hpp"
#include "morcert/linalg.hpp"
#include "morcert/parameter.hpp"
#include "morcert/report.hpp"
#include "morcert/rom.hpp"

// Serialization: Matrix Market files for matrices, JSON-manifested bundle
// directories for systems and reduced models, CSV for sweep and convergence
// tables. Every number is written in its shortest exact form, so reading
// back what was written reproduces each value bit for bit.
namespace morcert::io
{

// Shortest decimal form that parses back to the same double ("inf"/"nan"
// spelled out). parse_double accepts exactly one full number.
std::string format_double(double x);
double parse_double(const std::string &text);

void write_text_file(const std::string &path, const std::string &text);
std::string read_text_file(const std::string &path);

// Matrix Market. Sparse storage writes the coordinate format, dense storage
// the array format, both as "complex general". The reader additionally
// accepts real/integer fields and symmetric/hermitian/skew-symmetric
// shapes (expanded on load); pattern files are rejected.
void write_matrix(const std::string &path, const ComplexMatrix &m);
ComplexMatrix read_matrix(const std::string &path);

// Parameter grids as plain text, one formatted point per line.
void write_grid(const std::string &path, const ParameterGrid &grid);
ParameterGrid read_grid(const std::string &path);

// System bundle: <dir>/system.json plus one .mtx file per affine term.
// Reading re-runs all construction-time validation.
void write_system_bundle(const std::string &dir, const AffineSystem &sys);
AffineSystem read_system_bundle(const std::string &dir);

// Reduced-model bundle: <dir>/rom.json, the basis, the reduced operator and
// drive terms, the retained full-order term products, and (optionally) the
// estimator state including its online blocks. A loaded bundle evaluates
// reduced solves, outputs, and online estimates without the parent system.
struct RomBundle
{
  ReducedModel rom;
  EstimatorState estimator;
  bool has_estimator = false;
};

void write_rom_bundle(const std::string &dir, const ReducedModel &rm,
                      const EstimatorState *estimator = nullptr);
RomBundle read_rom_bundle(const std::string &dir);

// Sweep table as CSV: metadata in leading '#' lines, one documented header
// row, then one line per (sample, port). sweep_from_csv is the exact
// inverse of sweep_to_csv.
std::string sweep_to_csv(const SweepResult &result);
SweepResult sweep_from_csv(const std::string &text);

// Greedy convergence log as CSV (one line per iteration) and as a JSON
// document with a schema_version field.
std::string greedy_to_csv(const GreedyReport &report);
std::string greedy_report_json(const GreedyReport &report);

} // namespace morcert::io

#endif // MORCERT_IO_HPP
