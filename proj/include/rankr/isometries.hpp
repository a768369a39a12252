#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "rankr/boundary.hpp"
#include "rankr/config.hpp"
#include "rankr/flag.hpp"
#include "rankr/kernel.hpp"
#include "rankr/lie.hpp"
#include "rankr/matrix.hpp"

namespace rankr {

enum class IsometryKind { kElliptic, kRegularAxial, kNonregularAxial, kStrictlyParabolic, kMixedParabolic };

std::string_view to_string(IsometryKind kind);
std::optional<IsometryKind> parse_isometry_kind(std::string_view s);

/// gamma = e h u with e elliptic, h hyperbolic, u unipotent, commuting.
struct JordanParts {
  Mat e;
  Mat h;
  Mat u;
};

/// Everything derived from one spectral analysis of an element.
struct SpectralAnalysis {
  Mat element;
  std::vector<EigenCluster> spectrum;
  /// Generalized eigenbasis in spectrum order, det +1.
  Mat basis;
  JordanParts parts;
  CartanVec translation;
};

/// Throws IllConditionedSpectrum when the eigenbasis condition number
/// exceeds tol.spectrum_condition.
SpectralAnalysis analyze(const Mat& g, const Tolerances& tol = default_tolerances());

JordanParts jordan_decompose(const Mat& g, const Tolerances& tol = default_tolerances());

/// Descending log-moduli of the eigenvalues, projected to trace zero.
CartanVec translation_vector(const Mat& g, const Tolerances& tol = default_tolerances());

struct IsometryClass {
  IsometryKind kind = IsometryKind::kElliptic;
  Vec moduli;
  CartanVec translation;
  double unipotent_deviation = 0.0;  // |u - I|_F
};

/// Throws IdentityInput for g = I.
IsometryClass classify(const Mat& g, const Tolerances& tol = default_tolerances());
IsometryClass classify(const SpectralAnalysis& a, const Tolerances& tol = default_tolerances());

struct FixedPoints {
  BoundaryPoint attracting;
  BoundaryPoint repelling;
};

/// Throws NotTranslating when L(g) vanishes.
FixedPoints fixed_points(const Mat& g, const Tolerances& tol = default_tolerances());
FixedPoints fixed_points(const SpectralAnalysis& a, const Tolerances& tol = default_tolerances());

struct Contraction {
  double plus = 0.0;   // min root of L
  double minus = 0.0;  // min root of iota(L)
};

/// Throws NotRegularAxial.
Contraction contraction_factor(const Mat& g, const Tolerances& tol = default_tolerances());

/// Throws NotParabolic unless g is strictly parabolic.
bool is_generic_parabolic(const Mat& g, const Tolerances& tol = default_tolerances());

/// Flag ker(u - I) < ker(u - I)^2 < ... of a generic parabolic element.
Flag parabolic_fixed_flag(const Mat& g, const Tolerances& tol = default_tolerances());

enum class EscapeOutcome { kEscaped, kFixedPointVisible, kInconclusive };

std::string_view to_string(EscapeOutcome outcome);

struct EscapeReport {
  EscapeOutcome outcome = EscapeOutcome::kInconclusive;
  /// Margin threshold defining the compact transversal set.
  double delta = 0.0;
  /// Smallest N such that every sample stays out for N <= j <= jmax.
  int escape_index = 0;
  std::vector<int> per_sample;
  /// Set for kFixedPointVisible: a flag whose relevant partial flag is fixed.
  std::optional<Flag> fixed_flag;
};

/// Iterates g^{+-j} on the samples and measures their transversality margin
/// against eta.flag. Throws NotParabolic, NotFixed.
EscapeReport parabolic_escape_test(const Mat& g, const BoundaryPoint& eta, const std::vector<Flag>& samples, int jmax,
                                   std::optional<double> delta = std::nullopt,
                                   const Tolerances& tol = default_tolerances());

}  // namespace rankr
