#include "echelon/baselines/powell.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace echelon {
namespace {

using Vec = Eigen::VectorXd;

constexpr double kGold = 1.618033988749895;
constexpr double kInvGold = 0.6180339887498949;
constexpr double kTiny = 1e-25;

class Search {
 public:
  Search(const Objective& f, const PowellOptions& o) : f_(f), opt_(o) {}

  Vec project(Vec x) const {
    if (opt_.project_nonnegative) x = x.cwiseMax(0.0);
    return x;
  }

  double eval(const Vec& x) {
    const Vec p = project(x);
    const double v = f_(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
    ++evals_;
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "powell: objective returned " << v << " at x = [";
      for (Eigen::Index i = 0; i < p.size(); ++i) msg << (i ? ", " : "") << p[i];
      msg << "] after " << evals_ << " evaluations";
      throw OptimizationError(msg.str());
    }
    if (v < best_f_) {
      best_f_ = v;
      best_x_ = p;
    }
    return v;
  }

  // Minimizes f(x + a d) over a; moves x and returns the new value.
  // d is a unit vector and fx = f(x).
  double line_minimize(Vec& x, const Vec& d, double fx) {
    auto phi = [&](double a) { return eval(x + a * d); };

    double a = 0.0;
    double b = opt_.initial_step, fb = phi(b);
    if (fb > fx) {
      const double fneg = phi(-opt_.initial_step);
      if (fneg >= fx) return golden(x, d, -opt_.initial_step, 0.0, opt_.initial_step, fx);
      b = -opt_.initial_step;
      fb = fneg;
    }
    // Expand downhill from a through b while the value keeps falling.
    double c = b + kGold * (b - a);
    double fc = phi(c);
    for (int i = 0; fc < fb && i < opt_.max_bracket_expansions; ++i) {
      a = b;
      b = c;
      fb = fc;
      c = b + kGold * (b - a);
      fc = phi(c);
    }
    if (fc < fb) {
      x += c * d;
      return fc;
    }
    return golden(x, d, a, b, c, fb);
  }

  const Vec& best_x() const { return best_x_; }
  double best_f() const { return best_f_; }
  int evals() const { return evals_; }

 private:
  // Golden-section search on the bracket (lo, mid, hi) with f(mid) = fmid
  // no higher than either end. Each probe goes into the larger segment.
  double golden(Vec& x, const Vec& d, double lo, double mid, double hi, double fmid) {
    if (lo > hi) std::swap(lo, hi);
    constexpr double kStep = 1.0 - kInvGold;
    while (hi - lo > opt_.line_tol * (1.0 + std::abs(mid))) {
      const bool right = hi - mid > mid - lo;
      const double u = right ? mid + kStep * (hi - mid) : mid - kStep * (mid - lo);
      const double fu = eval(x + u * d);
      if (fu < fmid) {
        (right ? lo : hi) = mid;
        mid = u;
        fmid = fu;
      } else {
        (right ? hi : lo) = u;
      }
    }
    x += mid * d;
    return fmid;
  }

  const Objective& f_;
  const PowellOptions& opt_;
  int evals_ = 0;
  double best_f_ = std::numeric_limits<double>::infinity();
  Vec best_x_;
};

Eigen::MatrixXd identity_directions(Eigen::Index n) { return Eigen::MatrixXd::Identity(n, n); }

bool degenerate(const Eigen::MatrixXd& dirs) {
  return std::abs(dirs.determinant()) < 1e-10;
}

}  // namespace

PowellResult powell_minimize(const Objective& objective, std::vector<double> x0,
                             const PowellOptions& options) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  Search search(objective, options);
  Vec x = search.project(Eigen::Map<const Vec>(x0.data(), n));
  double fx = search.eval(x);

  Eigen::MatrixXd dirs = identity_directions(n);
  int iter = 0;
  int restarts_left = options.restarts;
  bool converged = false;

  while (iter < options.max_iters && n > 0) {
    ++iter;
    const Vec start = x;
    const double f_start = fx;
    double biggest_drop = 0.0;
    Eigen::Index biggest = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double before = fx;
      fx = search.line_minimize(x, dirs.col(i), fx);
      if (before - fx > biggest_drop) {
        biggest_drop = before - fx;
        biggest = i;
      }
    }

    if (2.0 * (f_start - fx) <= options.ftol * (std::abs(f_start) + std::abs(fx)) + kTiny) {
      if (restarts_left > 0 && !dirs.isIdentity()) {
        --restarts_left;
        dirs = identity_directions(n);
        continue;
      }
      converged = true;
      break;
    }

    const Vec net = x - start;
    const double net_norm = net.norm();
    if (net_norm == 0.0) continue;
    const Vec extrapolated = 2.0 * x - start;
    const double fe = search.eval(extrapolated);
    if (fe < f_start) {
      const double a = f_start - fx - biggest_drop;
      const double b = f_start - fe;
      const double t = 2.0 * (f_start - 2.0 * fx + fe) * a * a - biggest_drop * b * b;
      if (t < 0.0) {
        const Vec d = net / net_norm;
        fx = search.line_minimize(x, d, fx);
        dirs.col(biggest) = dirs.col(n - 1);
        dirs.col(n - 1) = d;
        if (degenerate(dirs)) dirs = identity_directions(n);
      }
    }
  }

  PowellResult result;
  const Vec& best = search.best_x();
  result.x.assign(best.data(), best.data() + best.size());
  result.f = search.best_f();
  result.evaluations = search.evals();
  result.converged = converged;
  result.state.point.assign(x.data(), x.data() + x.size());
  result.state.value = fx;
  result.state.iterations = iter;
  result.state.bracket_tolerance = options.line_tol;
  for (Eigen::Index i = 0; i < n; ++i) {
    result.state.directions.emplace_back(dirs.col(i).data(), dirs.col(i).data() + n);
  }
  return result;
}

}  // namespace echelon
