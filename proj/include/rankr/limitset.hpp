#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rankr/config.hpp"
#include "rankr/error.hpp"
#include "rankr/flag.hpp"
#include "rankr/isometries.hpp"
#include "rankr/lie.hpp"
#include "rankr/matrix.hpp"
#include "rankr/schottky.hpp"

namespace rankr {

/// Letter 2m is generator m, letter 2m + 1 its inverse.
using Letters = std::vector<int>;

/// Letter matrices in alphabet order a, a^-1, b, b^-1, ... Each letter is
/// kept as a step matrix and a repeat count, letters[a] = steps[a]^repeats[a],
/// so products never multiply by a badly conditioned power at once.
struct Alphabet {
  std::vector<Mat> letters;
  std::vector<Mat> steps;
  std::vector<int> repeats;

  /// Inverses by LU.
  static Alphabet from_generators(const std::vector<Mat>& generators);
  /// Table bases and their inverses, repeated by the table's powers.
  static Alphabet from_table(const PingPongTable& table);
  int generator_count() const { return static_cast<int>(letters.size()) / 2; }
  int n() const { return letters.empty() ? 0 : letters.front().n(); }
};

/// "a", "A" for a^-1, "b", ...; the empty word prints as "1".
std::string word_name(const Letters& w);
Letters parse_word(const std::string& s);
bool is_cyclically_reduced(const Letters& w);
/// Lexicographically least cyclic rotation.
Letters canonical_rotation(const Letters& w);

struct GradedSvd {
  Vec log_sigma;  // descending
  Mat u;          // left singular vectors of P
};

/// A word value P stored as P^T = q D c with q orthogonal, D = diag(e^d_i)
/// kept as logarithms and c upper triangular with rows of max-abs one.
/// Singular values and left singular vectors are read off D c with relative
/// accuracy, whatever the spread of the singular values.
class GradedProduct {
 public:
  static GradedProduct identity(int n);
  /// Product P g, given g^T.
  GradedProduct times(const Mat& g_transposed) const;

  int n() const { return q_.n(); }
  /// log of the Frobenius norm of P.
  double log_norm() const;
  /// P / e^max(d), finite whenever P is.
  Mat scaled_value() const;
  /// P, valid only when log_norm is moderate.
  Mat value() const;
  GradedSvd svd() const;
  /// Descending log singular values of P.
  Vec log_singular_values() const { return svd().log_sigma; }
  /// Left singular vectors of P, descending.
  Mat left_vectors() const { return svd().u; }

 private:
  Mat q_;
  Mat c_;
  Vec d_;
};

struct LimitSample {
  Letters word;
  int length = 0;
  CartanVec cartan_direction;  // zero for the identity
  Flag angular_flag;
  std::optional<CartanVec> jordan_direction;
  std::optional<IsometryKind> kind;  // empty for the identity
  bool overflow = false;
};

/// log norm threshold past which a word is flagged (1e150).
inline constexpr double kOverflowLogNorm = 345.38776394910684;

struct WordView {
  const Letters& word;
  const GradedProduct& product;
  const Alphabet& alphabet;
};

struct WordDynamics {
  CartanVec translation;
  Flag attracting;
  int periods = 0;
  bool converged = false;
};

/// Orthogonal iteration on the word, one letter and one QR step at a time.
/// The per-period sums of log |r_ii| converge to the log eigenvalue moduli
/// and the iterated frame to the attracting flag, without ever forming the
/// word's value.
WordDynamics word_dynamics(const Alphabet& alphabet, const Letters& w, int max_periods = 200);

struct SampleOptions {
  bool classify = true;
};

LimitSample make_sample(const WordView& w, const SampleOptions& options = {}, const Tolerances& tol = default_tolerances());

int resolve_workers(int requested);

namespace detail {

inline GradedProduct apply_letter(GradedProduct p, const Mat& step_t, int repeats) {
  for (int i = 0; i < repeats; ++i) p = p.times(step_t);
  return p;
}

template <class R, class F>
void dfs(const Alphabet& alphabet, const std::vector<Mat>& steps_t, int max_length, Letters& word,
         const GradedProduct& p, F& f, std::vector<R>& out) {
  if (auto r = f(WordView{word, p, alphabet})) out.push_back(std::move(*r));
  if (static_cast<int>(word.size()) == max_length) return;
  for (int a = 0; a < static_cast<int>(steps_t.size()); ++a) {
    if (!word.empty() && (a ^ 1) == word.back()) continue;
    word.push_back(a);
    const auto i = static_cast<std::size_t>(a);
    dfs<R>(alphabet, steps_t, max_length, word, apply_letter(p, steps_t[i], alphabet.repeats[i]), f, out);
    word.pop_back();
  }
}

}  // namespace detail

/// Visits every reduced word of length <= max_length depth-first with
/// children in alphabet order, collecting f's non-empty results. Subtrees
/// under length-2 prefixes run on `workers` threads; the result order does
/// not depend on the worker count.
template <class R>
std::vector<R> map_words(const Alphabet& alphabet_in, int max_length, int workers,
                         const std::function<std::optional<R>(const WordView&)>& f) {
  if (alphabet_in.letters.empty()) fail(ErrorCode::kInsufficientGenerators, "no generators");
  if (max_length < 0) fail(ErrorCode::kInvalidArgument, "negative word length");
  const int n = alphabet_in.n();
  std::vector<Mat> steps_t;
  for (const Mat& g : alphabet_in.steps) steps_t.push_back(g.transposed());
  const int alphabet = static_cast<int>(steps_t.size());
  auto extend = [&](const GradedProduct& p, int a) {
    const auto i = static_cast<std::size_t>(a);
    return detail::apply_letter(p, steps_t[i], alphabet_in.repeats[i]);
  };
  const GradedProduct root = GradedProduct::identity(n);
  std::vector<R> out;
  auto fn = f;
  Letters word;
  if (auto r = fn(WordView{word, root, alphabet_in})) out.push_back(std::move(*r));
  if (max_length == 0) return out;

  struct Task {
    int first;
    int second;
  };
  std::vector<Task> tasks;
  for (int x = 0; x < alphabet; ++x) {
    for (int y = 0; y < alphabet; ++y) {
      if ((y ^ 1) != x) tasks.push_back({x, y});
    }
  }
  std::vector<std::vector<R>> buffers(max_length >= 2 ? tasks.size() : 0);
  if (max_length >= 2) {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    auto worker = [&] {
      auto local = f;
      for (std::size_t i = next++; i < tasks.size(); i = next++) {
        try {
          Letters w{tasks[i].first, tasks[i].second};
          const GradedProduct p = extend(extend(root, w[0]), w[1]);
          detail::dfs<R>(alphabet_in, steps_t, max_length, w, p, local, buffers[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const int count = std::max(1, std::min(resolve_workers(workers), static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < count; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::size_t task = 0;
  for (int x = 0; x < alphabet; ++x) {
    word = {x};
    if (auto r = fn(WordView{word, extend(root, x), alphabet_in})) {
      out.push_back(std::move(*r));
    }
    for (int y = 0; y < alphabet; ++y) {
      if ((y ^ 1) == x) continue;
      if (max_length >= 2) {
        for (R& r : buffers[task]) out.push_back(std::move(r));
      }
      ++task;
    }
  }
  return out;
}

struct EnumerateOptions {
  int max_length = 1;
  int min_length = 0;
  int workers = 1;
  bool classify = true;
};

/// Samples for every reduced word with length in [min_length, max_length].
std::vector<LimitSample> enumerate(const Alphabet& alphabet, const EnumerateOptions& options,
                                   const Tolerances& tol = default_tolerances());

/// Number of reduced words of length <= max_length over l generators.
std::uint64_t word_count(int l, int max_length);

/// Snaps to a 1e-9 grid, removes duplicates, sorts.
std::vector<CartanVec> dedup_directions(std::vector<CartanVec> v);

/// Jordan directions of regular-axial words, one per conjugacy class of
/// cyclically reduced words.
std::vector<CartanVec> limit_cone_sample(const Alphabet& alphabet, int max_length, int workers = 1,
                                         const Tolerances& tol = default_tolerances());

/// Cartan directions of words with length in [min_length, max_length].
std::vector<CartanVec> directional_sample(const Alphabet& alphabet, int max_length, int min_length = 6,
                                          int workers = 1);

/// max over a of min over b of |a - b|
double one_sided_distance(const std::vector<CartanVec>& a, const std::vector<CartanVec>& b);

struct ConeReport {
  std::vector<int> lengths;
  std::vector<double> forward;   // P sample at exactly that length against the cone
  std::vector<double> backward;  // cone against the P sample
  int cone_length = 0;
  std::size_t cone_size = 0;
  bool non_increasing = false;
  std::vector<CartanVec> cone;
  std::vector<std::vector<CartanVec>> p_samples;  // one per length
};

/// Throws EmptySample when no regular-axial word is found.
ConeReport cone_theorem_check(const Alphabet& alphabet, const std::vector<int>& p_lengths, int cone_length,
                              int workers = 1, const Tolerances& tol = default_tolerances());

struct MinimalityReport {
  int targets = 0;
  int approached = 0;
  /// Shortest orbit word length reaching each target, -1 if none.
  std::vector<int> first_length;
  double worst_distance = 0.0;
  long containment_checked = 0;
  long containment_inside = 0;
  double worst_containment_margin = 0.0;
};

struct MinimalityOptions {
  int target_length = 8;
  int orbit_length = 10;
  double eps = 0.05;
  int containment_min = 2;
  int containment_max = 8;
  int workers = 1;
};

/// Orbit of the first attracting point against long-word angular flags, and
/// containment of angular flags in the union of the table's neighborhoods.
MinimalityReport minimality_check(const PingPongTable& table, const MinimalityOptions& options = {},
                                  const Tolerances& tol = default_tolerances());

struct ProductReport {
  int pairs = 0;
  int successes = 0;
  double fraction = 0.0;
};

/// Cross pairs (flag of one length-max word, direction of another) matched
/// by a single word of length in [min_length, max_length].
ProductReport product_structure_check(const PingPongTable& table, int max_length, double eps, int pairs = 200,
                                      std::uint64_t seed = 1, int min_length = 6, int workers = 1);

struct AxialDensityReport {
  int samples = 0;
  int axial_words = 0;
  double worst_distance = 0.0;
  double within_eps = 0.0;
};

/// Long-word orbit samples against attracting points of regular-axial words.
AxialDensityReport axial_density_check(const PingPongTable& table, int max_length, double eps, int workers = 1,
                                       const Tolerances& tol = default_tolerances());

}  // namespace rankr
