#include "memd/spline.hpp"

#include <cmath>

namespace memd {

std::vector<double> thomas_solve(const TridiagonalSystem& sys) {
  const std::size_t n = sys.diag.size();
  if (n == 0) throw TooFewKnots("thomas_solve: empty system");
  if (sys.sub.size() != n - 1 || sys.super.size() != n - 1 || sys.rhs.size() != n)
    throw DimensionMismatch("thomas_solve: inconsistent band lengths");

  std::vector<double> diag(sys.diag), rhs(sys.rhs);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(diag[i - 1]) < 1e-12) throw SingularSystem("thomas_solve: vanishing pivot");
    const double w = sys.sub[i - 1] / diag[i - 1];
    diag[i] -= w * sys.super[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (std::abs(diag[n - 1]) < 1e-12) throw SingularSystem("thomas_solve: vanishing pivot");

  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i > 0; --i)
    x[i - 1] = (rhs[i - 1] - sys.super[i - 1] * x[i]) / diag[i - 1];
  return x;
}

}  // namespace memd
