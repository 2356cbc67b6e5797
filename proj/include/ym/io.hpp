#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ym/evolve.hpp"
#include "ym/selfsimilar.hpp"

// Run manifests (plain-text key = value), deterministic CSV export with
// versioned schema headers, and the command drivers behind the CLI. Every
// run writes its resolved manifest next to its outputs; re-running that
// manifest reproduces the outputs byte for byte.

namespace ym {

struct ParseError : std::runtime_error {
  int line;  // 1-based; 0 when no line applies
  ParseError(int line_, const std::string& what);
};

enum class Command {
  Evolve,
  Bisect,
  SweepSubcritical,
  DepartureScaling,
  FitLambda,
  Shoot,
  ConeEnergy,
};

Command command_from_string(const std::string& s);  // throws invalid_argument
std::string to_string(Command c);

struct RunManifest {
  Command command = Command::Evolve;
  EvolutionConfig config;
  std::string output_dir = "out";
  // bisection / sweeps
  double A_lo = 0.05;
  double A_hi = 0.2;
  double tol = 1e-6;       // relative bracket tolerance
  double A_star = 0.0;     // 0 = determine by bisection first
  std::vector<double> eps = {1e-5, 1e-6, 1e-7, 1e-8, 1e-9};
  // detector threshold on the distance to W_1, as a multiple of its
  // minimum; must clear the critical run's hover oscillation (~3x minimum)
  double departure_factor = 4.0;
  // shooting window
  double b_lo = -100.0;
  double b_hi = -0.5;
};

// Applies one key = value setting; line is used in error messages.
void apply_setting(RunManifest& m, const std::string& key,
                   const std::string& value, int line = 0);

// Parses manifest text (one key = value per line, '#' comments) over the
// documented defaults, then validates. Throws ParseError with the
// offending line number.
RunManifest parse_manifest(const std::string& text);

// Fully resolved, parseable echo of a manifest.
std::string manifest_text(const RunManifest& m);

// First-line schema tag of a CSV written by this module ("ym.series v1",
// ...). Throws std::runtime_error if the file has no schema line.
std::string read_schema(const std::string& path);

// CSV writers; every file begins with "# schema: <name> <version>".
void write_series_csv(const std::string& path,
                      const std::vector<DiagRow>& rows);
void write_profile_csv(const std::string& path, const SelfSimilarProfile& p);
// One rescaled frame (eta, w(t, lambda eta)) on a log-spaced eta grid.
void write_rescaled_snapshot_csv(const std::string& path,
                                 const Snapshot& snap);
void write_bracket_csv(const std::string& path,
                       const std::vector<std::pair<double, OutcomeKind>>& h);

// Rescaled frames for every snapshot with a defined scale; returns the
// files written (snapshots without a scale are skipped).
std::vector<std::string> emit_rescaled_snapshots(
    const EvolutionResult& run, const std::string& out_dir);

// Executes the manifest's command, writing artifacts plus manifest.txt and
// summary.json under output_dir (honoring the YMLAB_OUTPUT_PREFIX
// environment variable). Returns 0 on completed runs (including
// Dispersion), nonzero on errors; the summary records the reason.
int run_manifest(const RunManifest& m);

}  // namespace ym
