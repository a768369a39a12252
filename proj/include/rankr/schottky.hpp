#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rankr/boundary.hpp"
#include "rankr/config.hpp"
#include "rankr/flag.hpp"
#include "rankr/lie.hpp"
#include "rankr/matrix.hpp"

namespace rankr {

/// g in SL(n) with g . standard = plus and g . reversed = minus. Column i
/// spans V_i(plus) cap W_{n-i+1}(minus). Throws NotTransverse.
Mat adapt_frame(const Flag& plus, const Flag& minus, const Tolerances& tol = default_tolerances());

/// g exp(diag L) g^-1 with g = adapt_frame(plus, minus). Throws NotTransverse
/// or NotInterior.
Mat make_axial(const Flag& plus, const Flag& minus, const CartanVec& l, const Tolerances& tol = default_tolerances());

/// k (I + E_12 + ... + E_{n-1,n}) k^T for the frame k of f.
Mat make_generic_parabolic(const Flag& f);

struct Neighborhood {
  Flag center;
  double radius = 0.0;
};

/// Axial generator m (0-based) repels into points[2m] and attracts into
/// points[2m + 1]; parabolic generator l + j owns points[2l + j].
struct PingPongTable {
  int axial = 0;
  std::vector<BoundaryPoint> points;
  std::vector<Neighborhood> neighborhoods;
  std::vector<Mat> bases;
  std::vector<int> powers;

  int n() const { return points.empty() ? 0 : points.front().flag.n(); }
  int generator_count() const { return static_cast<int>(bases.size()); }
  bool is_axial(int m) const { return m < axial; }
  int attracting_index(int m) const { return m < axial ? 2 * m + 1 : axial + m; }
  int repelling_index(int m) const { return m < axial ? 2 * m : axial + m; }
  /// bases[m]^powers[m]
  Mat generator(int m) const;
  std::vector<Mat> generators() const;
};

struct BuildOptions {
  double radius_policy = 0.25;
  int k_max = 60;
  int resolution = 2000;
  std::uint64_t seed = 1;
};

/// Flags come in the table's point order: (repelling, attracting) per axial
/// generator, then one fixed flag per parabolic generator. Throws
/// NotTransverse, NotInterior, InvalidArgument or PowerExhausted.
PingPongTable build_table(const std::vector<Flag>& flags, const std::vector<CartanVec>& l_choices,
                          const BuildOptions& options = {}, const Tolerances& tol = default_tolerances());

enum class CertificationStatus { kCertified, kFailed, kFailedPrecondition };

std::string_view to_string(CertificationStatus status);

struct Witness {
  Flag flag;
  int generator = -1;  // -1 when the witness shows overlapping neighborhoods
  int sign = 0;
  int multiple = 0;
  int source = -1;  // neighborhood the flag was drawn from, -1 for the complement
  int target = -1;
  double margin = 0.0;
};

struct CertificationReport {
  CertificationStatus status = CertificationStatus::kFailed;
  int resolution = 0;
  long samples_checked = 0;
  double min_margin = 0.0;
  std::vector<double> generator_margins;
  std::optional<Witness> witness;
  std::string reason;

  bool certified() const { return status == CertificationStatus::kCertified; }
};

/// Sampling check of Klein's criterion. Not a proof: margins are only known
/// at the sampled flags.
CertificationReport certify_klein(const PingPongTable& table, int resolution, std::uint64_t seed = 1,
                                  const Tolerances& tol = default_tolerances());

/// Flag at flag_distance rho from center, in a random direction.
Flag sample_flag_at(const Flag& center, double rho, std::mt19937_64& rng);

/// Haar-random flag.
Flag random_flag(int n, std::mt19937_64& rng);

struct NonelementaryReport {
  bool nonelementary = false;
  std::string reason;
};

/// Transversality hypotheses on the fixed flags of regular axial and generic
/// parabolic generators. Throws InsufficientGenerators.
NonelementaryReport check_nonelementary(const std::vector<Mat>& generators, const Tolerances& tol = default_tolerances());
NonelementaryReport check_nonelementary(const PingPongTable& table, const Tolerances& tol = default_tolerances());

/// Smallest Frobenius distance between values of distinct reduced words of
/// length <= max_length.
double min_word_separation(const std::vector<Mat>& generators, int max_length);

}  // namespace rankr
