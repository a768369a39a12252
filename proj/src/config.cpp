#include "rankr/config.hpp"

namespace rankr {

const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace rankr
