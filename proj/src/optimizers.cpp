#include "swsched/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>

namespace swsched {

namespace {

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void check_bounds(const std::optional<Bounds>& bounds, std::size_t n) {
  if (!bounds) return;
  if (bounds->lower.size() != n || bounds->upper.size() != n)
    throw std::invalid_argument("bounds dimension does not match the starting point");
  for (std::size_t i = 0; i < n; ++i)
    if (bounds->lower[i] > bounds->upper[i]) throw std::invalid_argument("lower bound above upper bound");
}

void clamp_into(const std::optional<Bounds>& bounds, std::vector<double>& x) {
  if (!bounds) return;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], bounds->lower[i], bounds->upper[i]);
}

// Counts evaluations, records iterates and applies the stall rule.
class Progress {
 public:
  Progress(const Objective& f, const StallRule& stall, std::size_t max_iterations)
      : f_(f), stall_(stall), max_iterations_(max_iterations) {}

  double evaluate(std::span<const double> x) {
    const double v = f_(x);
    ++evaluations_;
    if (!std::isfinite(v)) throw DivergenceError(fmt::format("objective returned {} at evaluation {}", v, evaluations_), trace_);
    return v;
  }

  void record(double value) {
    trace_.push_back(value);
    best_ = std::min(best_, value);
  }

  /// Closes one iteration for the stall rule.
  void mark_iteration() { best_history_.push_back(best_); }

  bool exhausted() const { return trace_.size() >= max_iterations_; }

  bool stalled() const {
    const auto t = best_history_.size();
    if (stall_.window == 0 || t <= stall_.window) return false;
    return best_history_[t - 1 - stall_.window] - best_history_[t - 1] < stall_.tolerance;
  }

  OptimizeResult finish(std::vector<double> x, double fx, std::string reason) {
    OptimizeResult r;
    r.x = std::move(x);
    r.fx = fx;
    r.trace = std::move(trace_);
    r.evaluations = evaluations_;
    r.iterations = r.trace.size();
    r.stop_reason = std::move(reason);
    return r;
  }

 private:
  const Objective& f_;
  StallRule stall_;
  std::size_t max_iterations_;
  std::size_t evaluations_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  std::vector<double> trace_;
  std::vector<double> best_history_;
};

// Inverse of a row-major n x n matrix by Gauss-Jordan with partial pivoting.
// Returns false when a pivot falls below `tiny`.
bool invert(std::vector<double> a, std::size_t n, std::vector<double>& inv, double tiny) {
  inv.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) <= tiny) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a[piv * n + k], a[col * n + k]);
        std::swap(inv[piv * n + k], inv[col * n + k]);
      }
    }
    const double d = a[col * n + col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col * n + k] /= d;
      inv[col * n + k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double m = a[r * n + col];
      if (m == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r * n + k] -= m * a[col * n + k];
        inv[r * n + k] -= m * inv[col * n + k];
      }
    }
  }
  return true;
}

}  // namespace

OptimizeResult cobyla_minimize(const Objective& f, std::vector<double> x0, const CobylaOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("cannot optimize over zero parameters");
  if (!(options.rho_begin > 0.0) || !(options.rho_end > 0.0) || options.rho_end > options.rho_begin)
    throw std::invalid_argument("COBYLA needs 0 < rho_end <= rho_begin");
  check_bounds(options.bounds, n);
  clamp_into(options.bounds, x0);

constexpr double kMaxDelta = 8.0;  // trust radius cap in units of rho_begin
constexpr double kFar = 2.1;       // vertex farther than kFar * rho needs replacing
  constexpr double kFlat = 0.25;     // vertex closer than kFlat * rho to its opposite face
  constexpr double kPoorRatio = 0.1; // achieved / predicted reduction below this shrinks rho

  Progress progress(f, options.stall, options.max_iterations);
  std::vector<std::vector<double>> vertex(n + 1);
  std::vector<double> value(n + 1, std::numeric_limits<double>::infinity());
  double rho = options.rho_begin;

  auto evaluate = [&](const std::vector<double>& x) {
    const double v = progress.evaluate(x);
    progress.record(v);
    return v;
  };
  auto best_index = [&] {
    return static_cast<std::size_t>(std::min_element(value.begin(), value.end()) - value.begin());
  };
  auto finish = [&](const char* reason) {
    const auto b = best_index();
    return progress.finish(vertex[b], value[b], reason);
  };

  vertex[0] = x0;
  value[0] = evaluate(x0);
  for (std::size_t i = 1; i <= n; ++i) {
    vertex[i] = x0;
    double step = rho;
    if (options.bounds) {
      const double lo = options.bounds->lower[i - 1], hi = options.bounds->upper[i - 1];
      if (x0[i - 1] + step > hi) step = (x0[i - 1] - rho >= lo) ? -rho : (hi - x0[i - 1] >= x0[i - 1] - lo ? hi - x0[i - 1] : lo - x0[i - 1]);
    }
    vertex[i][i - 1] += step;
    if (progress.exhausted()) {
      vertex.resize(i);
      value.resize(i);
      return finish("max_iterations");
    }
    value[i] = evaluate(vertex[i]);
  }

  std::vector<double> d(n * n), dinv, df(n), g(n), s(n), xn(n);
  std::vector<std::size_t> row_vertex(n);
  std::vector<double> dist(n), sigma(n);

  double delta = rho;
  auto shrink = [&]() -> bool {
    if (delta > rho) {
      delta = std::max(rho, 0.5 * delta);
      return true;
    }
    if (rho <= options.rho_end) return false;
    const double ratio = rho / options.rho_end;
    if (ratio <= 16.0)
      rho = options.rho_end;
    else if (ratio <= 250.0)
      rho = std::sqrt(ratio) * options.rho_end;
    else
      rho *= 0.1;
    delta = rho;
    return true;
  };

  while (true) {
    if (progress.exhausted()) return finish("max_iterations");
    if (progress.stalled()) return finish("stalled");

    const auto b = best_index();
    std::size_t r = 0;
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == b) continue;
      row_vertex[r] = i;
      for (std::size_t k = 0; k < n; ++k) d[r * n + k] = vertex[i][k] - vertex[b][k];
      df[r] = value[i] - value[b];
      dist[r] = norm2(std::span<const double>(d.data() + r * n, n));
      ++r;
    }

    const bool regular = invert(d, n, dinv, 1e-14 * rho);
    std::ptrdiff_t repair = -1;
    if (!regular) {
      repair = static_cast<std::ptrdiff_t>(std::min_element(dist.begin(), dist.end()) - dist.begin());
    } else {
      // Column c of dinv is normal to the face opposite row c; its inverse
      // length is the distance from that vertex to the face.
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += dinv[k * n + c] * dinv[k * n + c];
        sigma[c] = 1.0 / std::sqrt(acc);
      }
      const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
      const auto flat = std::min_element(sigma.begin(), sigma.end()) - sigma.begin();
      if (dist[static_cast<std::size_t>(far)] > kFar * delta)
        repair = far;
      else if (sigma[static_cast<std::size_t>(flat)] < kFlat * rho)
        repair = flat;
      for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += dinv[k * n + c] * df[c];
        g[k] = acc;
      }
    }

    if (repair >= 0) {
      const auto rr = static_cast<std::size_t>(repair);
      if (regular) {
        for (std::size_t k = 0; k < n; ++k) s[k] = dinv[k * n + rr];
      } else {
        // Degenerate simplex: move the vertex along the coordinate least
        // represented by the remaining rows.
        std::fill(s.begin(), s.end(), 0.0);
        s[rr % n] = 1.0;
      }
      const double len = norm2(s);
      for (auto& v : s) v *= rho / len;
      if (regular && dot(g, s) > 0.0)
        for (auto& v : s) v = -v;
      for (std::size_t k = 0; k < n; ++k) xn[k] = vertex[b][k] + s[k];
      clamp_into(options.bounds, xn);
      const auto target = row_vertex[rr];
      vertex[target] = xn;
      value[target] = evaluate(xn);
      continue;
    }

    const double gnorm = norm2(g);
    if (gnorm == 0.0) {
      if (!shrink()) return finish("converged");
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) s[k] = -delta * g[k] / gnorm;
    if (options.bounds) {
      // Drop components that push through an active bound, then rescale.
      std::vector<double> gp = g;
      for (std::size_t pass = 0; pass < n; ++pass) {
        bool changed = false;
        for (std::size_t k = 0; k < n; ++k) {
          const double target = vertex[b][k] + s[k];
          if ((target > options.bounds->upper[k] && vertex[b][k] >= options.bounds->upper[k]) ||
              (target < options.bounds->lower[k] && vertex[b][k] <= options.bounds->lower[k])) {
            if (gp[k] != 0.0) changed = true;
            gp[k] = 0.0;
          }
        }
        const double pn = norm2(gp);
        if (pn == 0.0) {
          std::fill(s.begin(), s.end(), 0.0);
          break;
        }
        for (std::size_t k = 0; k < n; ++k) s[k] = -delta * gp[k] / pn;
        if (!changed) break;
      }
    }
    for (std::size_t k = 0; k < n; ++k) xn[k] = vertex[b][k] + s[k];
    clamp_into(options.bounds, xn);
    for (std::size_t k = 0; k < n; ++k) s[k] = xn[k] - vertex[b][k];
    if (norm2(s) < 1e-3 * rho) {
      if (!shrink()) return finish("converged");
      continue;
    }

    const double predicted = -dot(g, s);
    const double fb = value[b];
    const double fnew = evaluate(xn);
    progress.mark_iteration();

    // Replace the vertex whose swap keeps the simplex volume largest.
    std::size_t replace = 0;
    double best_score = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      double proj = 0.0;
      for (std::size_t k = 0; k < n; ++k) proj += dinv[k * n + c] * s[k];
      const double score = std::abs(proj) * std::max(1.0, dist[c] / delta);
      if (score > best_score) {
        best_score = score;
        replace = c;
      }
    }
    vertex[row_vertex[replace]] = xn;
    value[row_vertex[replace]] = fnew;

    if (fb - fnew < kPoorRatio * predicted) {
      if (!shrink()) return finish("converged");
    } else if (fb - fnew > 0.7 * predicted) {
      delta = std::min(2.0 * delta, kMaxDelta * options.rho_begin);
    }
  }
}

double SpsaGains::step(std::size_t k) const { return a / std::pow(static_cast<double>(k) + 1.0 + A0, alpha); }

double SpsaGains::perturbation(std::size_t k) const { return c / std::pow(static_cast<double>(k) + 1.0, gamma); }

namespace {

std::vector<double> rademacher(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> delta(n);
  for (auto& v : delta) v = (rng() & 1U) ? 1.0 : -1.0;
  return delta;
}

// Returns the gradient estimate; `evals` accumulates the two calls.
std::vector<double> spsa_gradient(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                                  double ck, std::mt19937_64& rng) {
  const auto n = x.size();
  const auto delta = rademacher(n, rng);
  std::vector<double> plus(x.begin(), x.end()), minus(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    plus[i] += ck * delta[i];
    minus[i] -= ck * delta[i];
  }
  const double diff = f(plus) - f(minus);
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) grad[i] = diff / (2.0 * ck * delta[i]);
  return grad;
}

}  // namespace

std::vector<double> spsa_step(const Objective& f, std::span<const double> x, std::size_t k, const SpsaGains& gains,
                              std::mt19937_64& rng) {
  const auto grad = spsa_gradient(f, x, gains.perturbation(k), rng);
  std::vector<double> next(x.begin(), x.end());
  const double ak = gains.step(k);
  for (std::size_t i = 0; i < next.size(); ++i) next[i] -= ak * grad[i];
  return next;
}

OptimizeResult spsa_minimize(const Objective& f, std::vector<double> x, const SpsaOptions& options) {
  if (x.empty()) throw std::invalid_argument("cannot optimize over zero parameters");
  check_bounds(options.bounds, x.size());
  clamp_into(options.bounds, x);
  Progress progress(f, options.stall, options.max_iterations);
  const Objective counted = [&](std::span<const double> p) { return progress.evaluate(p); };
  std::mt19937_64 rng(options.seed);

  SpsaGains gains = options.gains;
  if (options.calibrate && options.calibration_samples > 0) {
    double magnitude = 0.0;
    for (std::size_t s = 0; s < options.calibration_samples; ++s) {
      const auto grad = spsa_gradient(counted, x, gains.c, rng);
      magnitude += std::abs(grad[0]);
    }
    magnitude /= static_cast<double>(options.calibration_samples);
    if (magnitude > 0.0) gains.a = options.target_step * std::pow(gains.A0 + 1.0, gains.alpha) / magnitude;
  }

  double fx = progress.evaluate(x);
  progress.record(fx);
  progress.mark_iteration();
  std::vector<double> best_x = x;
  double best_f = fx;
  for (std::size_t k = 0;; ++k) {
    if (progress.exhausted()) return progress.finish(best_x, best_f, "max_iterations");
    if (progress.stalled()) return progress.finish(best_x, best_f, "stalled");
    x = spsa_step(counted, x, k, gains, rng);
    clamp_into(options.bounds, x);
    if (options.track_iterates) {
      fx = progress.evaluate(x);
      if (fx < best_f) {
        best_f = fx;
        best_x = x;
      }
      progress.record(fx);
    } else {
      best_x = x;
      progress.record(best_f);
    }
    progress.mark_iteration();
  }
}

OptimizeResult gradient_descent_minimize(const Objective& f, const GradientFn& gradient, std::vector<double> x,
                                         const GradientDescentOptions& options) {
  if (x.empty()) throw std::invalid_argument("cannot optimize over zero parameters");
  Progress progress(f, options.stall, options.max_iterations);
  double fx = progress.evaluate(x);
  progress.record(fx);
  progress.mark_iteration();
  double scale = -1.0;
  std::vector<double> trial(x.size());
  while (true) {
    if (progress.exhausted()) return progress.finish(x, fx, "max_iterations");
    if (progress.stalled()) return progress.finish(x, fx, "stalled");
    const auto g = gradient(x);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax == 0.0) return progress.finish(x, fx, "converged");
    if (scale < 0.0) scale = options.initial_step / gmax;
    const double gg = dot(g, g);
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - scale * g[i];
      const double ft = progress.evaluate(trial);
      if (ft <= fx - 1e-4 * scale * gg) {
        x = trial;
        fx = ft;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) return progress.finish(x, fx, "converged");
    progress.record(fx);
    progress.mark_iteration();
    scale *= 2.0;
  }
}

}  // namespace swsched
