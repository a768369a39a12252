#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankr/config.hpp"
#include "rankr/error.hpp"
#include "rankr/limitset.hpp"
#include "rankr/matrix.hpp"
#include "rankr/schottky.hpp"

namespace rankr::cli {

using nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kMalformed = 1,
  kNumerical = 2,
  kPowerExhausted = 3,
  kCertificationFailed = 4,
  kEmptySample = 5,
};

int exit_code_for(ErrorCode code);

struct Recipe {
  /// Frames of the axial flags, (repelling, attracting) per generator.
  std::vector<Mat> flags;
  std::vector<CartanVec> l;
  std::vector<Mat> parabolic_flags;
  double radius_policy = 0.25;
  /// Applied to every radius after the powers are fixed.
  double radius_scale = 1.0;
  int k_max = 60;
  int resolution = 2000;
};

struct NamedMatrix {
  std::string name;
  Mat matrix;
};

struct GroupSpec {
  int n = 0;
  Tolerances tol;
  std::uint64_t seed = 1;
  std::vector<NamedMatrix> generators;
  std::optional<Recipe> schottky;
};

/// Throws MalformedInput.
GroupSpec parse_spec(const json& j);
json spec_to_json(const GroupSpec& spec);
GroupSpec load_spec(const std::string& path);

json table_to_json(const PingPongTable& table);
PingPongTable table_from_json(const json& j);

/// Builds, then scales radii by the recipe's radius_scale.
PingPongTable build_from_recipe(const GroupSpec& spec);

/// FNV-1a over the canonical (key-sorted, compact) dump.
std::uint64_t config_hash(const json& config);
std::string hex64(std::uint64_t h);

/// %.17g, which parses back to the same double.
std::string format_number(double x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const Table& t);
/// Throws MalformedInput.
Table parse_csv(const std::string& text);
/// Numeric cells become numbers, empty cells null, the rest strings.
json row_to_json(const std::vector<std::string>& header, const std::vector<std::string>& row);
std::vector<std::string> row_from_json(const std::vector<std::string>& header, const json& j);
json table_to_rows_json(const Table& t);

/// word, length, class, dir_i, jdir_i and, with a table, the signed flag
/// distance to the nearest neighborhood (negative inside).
Table samples_table(const std::vector<LimitSample>& samples, int n, const PingPongTable* table);

/// Directions of closure a+ in the chart (h1 - h2, h2 - h3) / (h1 - h3),
/// dots for the first set and crosses for the second. n is 2 or 3.
std::string directions_svg(int n, const std::vector<CartanVec>& dots, const std::vector<CartanVec>& crosses,
                           const std::string& title);

/// Runs one command line; the report goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rankr::cli
