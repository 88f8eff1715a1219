#pragma once
// Explicit Dormand-Prince 5(4) pair with FSAL, PI step-size control, a
// quartic dense-output interpolant, and event location by bisection on the
// interpolant.  Fixed compile-time dimension; right-hand sides are passed
// as callables evaluated as rhs(t, y, dydt).

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "g2inst/types.hpp"

namespace g2inst {

template <int N>
struct Dopri5 {
  using Vec = Eigen::Matrix<double, N, 1>;

  struct Options {
    double rtol = 1e-10;
    double atol = 1e-14;        // uniform absolute floor
    double h_init = 0.0;        // 0: choose automatically
    double h_max = 0.0;         // 0: span of integration
    long max_steps = 50'000'000;
    bool store_dense = false;   // keep every step's interpolant
    bool store_steps = true;    // keep accepted (t, y) pairs
  };

  // Scalar event g(t, y); a root is reported when g changes sign across an
  // accepted step in the requested direction (+1 up, -1 down, 0 both).
  struct Event {
    std::function<double(double, const Vec&)> g;
    int direction = 0;
    bool terminal = false;
  };

  struct EventHit {
    int index = -1;
    double t = 0.0;
    Vec y;
  };

  // Dense interpolant of one accepted step (contd5 form):
  //   u(theta) = r1 + theta*(r2 + (1-theta)*(r3 + theta*(r4 + (1-theta)*r5)))
  struct DenseStep {
    double t0, h;
    Vec r1, r2, r3, r4, r5;
    Vec eval(double t) const {
      const double th = (t - t0) / h;
      return r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)));
    }
  };

  enum class Exit { reached_end, event_stop, step_failure, max_steps };

  struct Result {
    std::vector<double> ts;
    std::vector<Vec> ys;
    std::vector<DenseStep> dense;
    std::vector<EventHit> hits;   // all located roots, terminal or not
    Exit exit = Exit::reached_end;
    double t_end = 0.0;
    Vec y_end;
    long n_steps = 0, n_rejected = 0;

    // Dense sample; requires store_dense and t inside the covered span.
    Vec sample(double t) const { return locate(t).eval(t); }
    Vec sample_derivative(double t) const {
      const DenseStep& s = locate(t);
      // derivative of the contd5 polynomial in theta, back in t
      const double th = (t - s.t0) / s.h;
      const Vec A = s.r3 + th * (s.r4 + (1.0 - th) * s.r5);
      const Vec dA = (s.r4 + (1.0 - th) * s.r5) + th * (-s.r5);
      return (s.r2 + (1.0 - 2.0 * th) * A + th * (1.0 - th) * dA) / s.h;
    }
    const DenseStep& locate(double t) const {
      if (dense.empty()) throw std::logic_error("dense output was not stored");
      size_t lo = 0, hi = dense.size() - 1;
      while (lo < hi) {
        const size_t mid = (lo + hi + 1) / 2;
        if (dense[mid].t0 <= t)
          lo = mid;
        else
          hi = mid - 1;
      }
      return dense[lo];
    }
  };

  template <class RHS>
  static Result integrate(RHS&& rhs, double t0, Vec y0, double t1,
                          const Options& opt = Options(),
                          const std::vector<Event>& events = {}) {
    Result res;
    const double span = t1 - t0;
    if (!(span > 0.0)) throw std::invalid_argument("integration span must be positive");
    const double hmax = opt.h_max > 0.0 ? opt.h_max : span;

    double t = t0;
    Vec y = y0;
    Vec k1;
    rhs(t, y, k1);

    double h = opt.h_init > 0.0 ? opt.h_init : initial_step(rhs, t, y, k1, opt);
    h = std::min(h, hmax);

    std::vector<double> ev_prev(events.size());
    for (size_t i = 0; i < events.size(); ++i) ev_prev[i] = events[i].g(t, y);

    if (opt.store_steps) {
      res.ts.push_back(t);
      res.ys.push_back(y);
    }

    Vec k2, k3, k4, k5, k6, k7, ynew, yerr;
    double errold = 1e-4;
    bool last = false;

    for (long step = 0; step < opt.max_steps; ++step) {
      if (t + 1.01 * h >= t1) {
        h = t1 - t;
        last = true;
      }
      if (!(h > std::abs(t) * 1e-15 + 1e-300)) {
        res.exit = Exit::step_failure;
        res.t_end = t;
        res.y_end = y;
        return res;
      }

      stages(rhs, t, y, h, k1, k2, k3, k4, k5, k6, k7, ynew, yerr);

      // scaled RMS error
      double err = 0.0;
      for (int i = 0; i < N; ++i) {
        const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double e = yerr[i] / sc;
        err += e * e;
      }
      err = std::sqrt(err / N);

      if (err <= 1.0) {
        // accept
        res.n_steps++;
        DenseStep ds = make_dense(y, ynew, k1, k3, k4, k5, k6, k7, t, h);
        const double tnew = t + h;

        int hit_idx = -1;
        double hit_t = 0.0;
        for (size_t i = 0; i < events.size(); ++i) {
          const double v0 = ev_prev[i];
          const double v1 = events[i].g(tnew, ynew);
          const bool crossed =
              (events[i].direction >= 0 && v0 < 0.0 && v1 >= 0.0) ||
              (events[i].direction <= 0 && v0 > 0.0 && v1 <= 0.0);
          if (crossed) {
            const double tr = locate_root(events[i].g, ds, t, tnew);
            if (hit_idx < 0 || tr < hit_t) {
              hit_idx = static_cast<int>(i);
              hit_t = tr;
            }
          }
          ev_prev[i] = v1;
        }

        if (opt.store_dense) res.dense.push_back(ds);

        if (hit_idx >= 0) {
          EventHit hit;
          hit.index = hit_idx;
          hit.t = hit_t;
          hit.y = ds.eval(hit_t);
          res.hits.push_back(hit);
          if (events[static_cast<size_t>(hit_idx)].terminal) {
            if (opt.store_steps) {
              res.ts.push_back(hit.t);
              res.ys.push_back(hit.y);
            }
            res.exit = Exit::event_stop;
            res.t_end = hit.t;
            res.y_end = hit.y;
            return res;
          }
        }

        t = tnew;
        y = ynew;
        k1 = k7;  // FSAL
        if (opt.store_steps) {
          res.ts.push_back(t);
          res.ys.push_back(y);
        }
        if (last) {
          res.exit = Exit::reached_end;
          res.t_end = t;
          res.y_end = y;
          return res;
        }
        // PI controller
        const double fac = 0.9 * std::pow(err + 1e-30, -0.7 / 5.0) *
                           std::pow(errold + 1e-30, 0.4 / 5.0);
        h *= std::clamp(fac, 0.2, 6.0);
        h = std::min(h, hmax);
        errold = std::max(err, 1e-4);
      } else {
        res.n_rejected++;
        last = false;
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
    res.exit = Exit::max_steps;
    res.t_end = t;
    res.y_end = y;
    return res;
  }

 private:
  template <class RHS>
  static void stages(RHS&& rhs, double t, const Vec& y, double h, const Vec& k1,
                     Vec& k2, Vec& k3, Vec& k4, Vec& k5, Vec& k6, Vec& k7,
                     Vec& ynew, Vec& yerr) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                     a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                     a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    Vec tmp = y + h * (a21 * k1);
    rhs(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, tmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + h, ynew, k7);
    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  }

  static DenseStep make_dense(const Vec& y, const Vec& ynew, const Vec& k1,
                              const Vec& k3, const Vec& k4, const Vec& k5,
                              const Vec& k6, const Vec& k7, double t, double h) {
    constexpr double d1 = -12715105075.0 / 11282082432.0;
    constexpr double d3 = 87487479700.0 / 32700410799.0;
    constexpr double d4 = -10690763975.0 / 1880347072.0;
    constexpr double d5 = 701980252875.0 / 199316789632.0;
    constexpr double d6 = -1453857185.0 / 822651844.0;
    constexpr double d7 = 69997945.0 / 29380423.0;
    DenseStep ds;
    ds.t0 = t;
    ds.h = h;
    const Vec ydiff = ynew - y;
    ds.r1 = y;
    ds.r2 = ydiff;
    ds.r3 = h * k1 - ydiff;
    ds.r4 = ydiff - h * k7 - ds.r3;
    ds.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    return ds;
  }

  template <class RHS>
  static double initial_step(RHS&& rhs, double t, const Vec& y, const Vec& k1,
                             const Options& opt) {
    // standard two-trial estimate
    double d0 = 0.0, d1 = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    Vec y1 = y + h0 * k1;
    Vec k2;
    rhs(t + h0, y1, k2);
    double d2 = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      const double dd = (k2[i] - k1[i]) / sc;
      d2 += dd * dd;
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(1e-6, h0 * 1e-3);
    return std::min(100.0 * h0, h1);
  }

  static double locate_root(const std::function<double(double, const Vec&)>& g,
                            const DenseStep& ds, double ta, double tb) {
    double va = g(ta, ds.eval(ta));
    double vb = g(tb, ds.eval(tb));
    if (va == 0.0) return ta;
    if (vb == 0.0) return tb;
    for (int it = 0; it < 200; ++it) {
      const double tm = 0.5 * (ta + tb);
      if (tm == ta || tm == tb) break;
      const double vm = g(tm, ds.eval(tm));
      if ((va < 0.0) == (vm < 0.0)) {
        ta = tm;
        va = vm;
      } else {
        tb = tm;
        vb = vm;
      }
      if (tb - ta < 1e-14 * (std::abs(ta) + 1.0)) break;
    }
    return 0.5 * (ta + tb);
  }
};

}  // namespace g2inst
