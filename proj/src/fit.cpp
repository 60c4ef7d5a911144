// Copyright 2026 The chbt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chbt/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include "chbt/error.hpp"
#include "chbt/optics.hpp"

namespace chbt {

namespace {

struct Data {
  Eigen::VectorXd x;  // rescaled to max |x| = 1
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  double scale = 1.0;
};

// Frequencies and rates live in units of 1 / scale inside the solver.
G2Model to_internal(G2Model m, double scale) {
  m.delta_f *= scale;
  m.gamma *= scale;
  return m;
}

G2Model to_physical(G2Model m, double scale) {
  m.delta_f /= scale;
  m.gamma /= scale;
  return m;
}

Data prepare(const G2Curve& curve, G2ModelKind kind, bool weighted) {
  const auto n = static_cast<Eigen::Index>(curve.points.size());
  Data d;
  d.x.resize(n);
  d.y.resize(n);
  d.w.resize(n);
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = curve.points[static_cast<std::size_t>(i)];
    double x = p.x;
    if (kind == G2ModelKind::delay && curve.kind == XKind::path_length) {
      x /= kSpeedOfLight;
    }
    if (!std::isfinite(x) || !std::isfinite(p.g2)) {
      throw DomainError(fmt::format("point {} is not finite", i));
    }
    if (weighted && !(p.sigma > 0.0 && std::isfinite(p.sigma))) {
      throw DomainError(fmt::format(
          "point {} has sigma = {}; a weighted fit needs sigma > 0", i, p.sigma));
    }
    d.x(i) = x;
    d.y(i) = p.g2;
    d.w(i) = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
    max_abs = std::max(max_abs, std::abs(x));
  }
  if (!(max_abs > 0.0)) throw DomainError("all x values are zero");
  d.scale = max_abs;
  d.x /= max_abs;
  return d;
}

double chi2_of(const Data& d, const G2Model& m) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < d.x.size(); ++i) {
    const double r = d.y(i) - model_value(m, d.x(i));
    s += d.w(i) * r * r;
  }
  return s;
}

double envelope(const G2Model& m, double x) {
  return m.kind == G2ModelKind::tau ? std::exp(-m.gamma * m.gamma * x * x) : 1.0;
}

struct Harmonic {
  double a = 0.0;  // cos coefficient
  double b = 0.0;  // sin coefficient
  double gain = 0.0;
};

// Weighted least squares of y - 1 on env cos(2 pi f x), env sin(2 pi f x).
Harmonic harmonic_fit(const Data& d, const G2Model& shape, double f) {
  double cc = 0.0, ss = 0.0, cs = 0.0, yc = 0.0, ys = 0.0;
  for (Eigen::Index i = 0; i < d.x.size(); ++i) {
    const double e = envelope(shape, d.x(i));
    const double c = e * std::cos(2.0 * kPi * f * d.x(i));
    const double s = e * std::sin(2.0 * kPi * f * d.x(i));
    const double r = d.y(i) - 1.0;
    const double w = d.w(i);
    cc += w * c * c;
    ss += w * s * s;
    cs += w * c * s;
    yc += w * r * c;
    ys += w * r * s;
  }
  const double det = cc * ss - cs * cs;
  Harmonic h;
  if (!(std::abs(det) > 1e-300)) return h;
  h.a = (yc * ss - ys * cs) / det;
  h.b = (ys * cc - yc * cs) / det;
  h.gain = h.a * yc + h.b * ys;
  return h;
}

G2Model from_harmonic(G2Model shape, double f, const Harmonic& h) {
  shape.delta_f = f;
  shape.epsilon = 2.0 * std::hypot(h.a, h.b);
  shape.phi = std::atan2(-h.b, h.a);
  return shape;
}

double gamma_guess(const Data& d) {
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < d.x.size(); ++i) {
    const double r = d.y(i) - 1.0;
    const double p = std::max(0.0, r * r - 1.0 / d.w(i));
    num += p * d.x(i) * d.x(i);
    den += p;
  }
  if (!(den > 0.0) || !(num > 0.0)) return 1.0;
  // Fringe power follows exp(-2 gamma^2 x^2), whose second moment is
  // 1 / (4 gamma^2).
  return 1.0 / (2.0 * std::sqrt(num / den));
}

// Highest frequency the sampling resolves: on a uniform grid every
// frequency above it has an alias with the same chi2.
double nyquist(const Data& d) {
  const double span = d.x.maxCoeff() - d.x.minCoeff();
  if (!(span > 0.0)) return 1.0;
  std::vector<double> xs(d.x.data(), d.x.data() + d.x.size());
  std::sort(xs.begin(), xs.end());
  double min_step = span;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double dx = xs[i] - xs[i - 1];
    if (dx > 0.0) min_step = std::min(min_step, dx);
  }
  return 0.5 / min_step;
}

// Returns the periodogram peak in internal units.
double coarse_frequency(const Data& d, const G2Model& shape) {
  const double span = d.x.maxCoeff() - d.x.minCoeff();
  if (!(span > 0.0)) return 1.0;
  const double f_low = 0.25 / span;
  const double f_high = std::max(nyquist(d), 2.0 * f_low);
  const double df = std::max(1.0 / (20.0 * span), (f_high - f_low) / 20000.0);
  double best_f = f_low;
  double best_gain = -1.0;
  for (double f = f_low; f <= f_high; f += df) {
    const auto h = harmonic_fit(d, shape, f);
    if (h.gain > best_gain) {
      best_gain = h.gain;
      best_f = f;
    }
  }
  return best_f;
}

struct Solve {
  G2Model model;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
  Eigen::MatrixXd curvature;
};

void normal_equations(const Data& d, const G2Model& m, Eigen::MatrixXd& a,
                      Eigen::VectorXd& g) {
  const auto p = static_cast<Eigen::Index>(parameter_vector(m).size());
  a = Eigen::MatrixXd::Zero(p, p);
  g = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < d.x.size(); ++i) {
    const auto grad = model_gradient(m, d.x(i));
    const Eigen::Map<const Eigen::VectorXd> j(grad.data(), p);
    const double r = d.y(i) - model_value(m, d.x(i));
    a.noalias() += d.w(i) * j * j.transpose();
    g.noalias() += d.w(i) * r * j;
  }
}

Solve levenberg_marquardt(const Data& d, G2Model start, int max_iterations,
                          double f_max) {
  Solve s;
  s.model = start;
  s.chi2 = chi2_of(d, start);
  s.history.push_back(s.chi2);
  double lambda = 1e-3;
  Eigen::MatrixXd a;
  Eigen::VectorXd g;
  normal_equations(d, s.model, a, g);
  for (s.iterations = 0; s.iterations < max_iterations;) {
    ++s.iterations;
    Eigen::MatrixXd damped = a;
    const double floor = 1e-12 * std::max(a.diagonal().maxCoeff(), 1e-300);
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      damped(k, k) += lambda * std::max(a(k, k), floor);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(g);
    auto p = parameter_vector(s.model);
    std::vector<double> trial_p(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      trial_p[k] = p[k] + step(static_cast<Eigen::Index>(k));
    }
    const auto trial = model_from_parameters(s.model.kind, trial_p);
    // Steps past the Nyquist frequency are rejected like uphill ones.
    const bool admissible = step.allFinite() && std::abs(trial.delta_f) <= f_max;
    const double trial_chi2 =
        admissible ? chi2_of(d, trial) : std::numeric_limits<double>::infinity();
    if (trial_chi2 <= s.chi2) {
      const double drop = s.chi2 - trial_chi2;
      s.model = trial;
      s.chi2 = trial_chi2;
      s.history.push_back(trial_chi2);
      lambda = std::max(lambda / 10.0, 1e-12);
      normal_equations(d, s.model, a, g);
      double rel = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        rel = std::max(rel, std::abs(step(static_cast<Eigen::Index>(k))) /
                                (std::abs(trial_p[k]) + 1e-12));
      }
      if (rel < 1e-13 || drop <= 1e-16 * trial_chi2) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) break;
    }
  }
  s.converged = g.lpNorm<Eigen::Infinity>() <= 1e-6 * (1.0 + s.chi2);
  s.curvature = a;
  return s;
}

FitResult finish(const Data& d, const Solve& s, bool weighted) {
  FitResult r;
  const auto internal = s.model;
  r.kind = internal.kind;
  r.chi2 = s.chi2;
  r.dof = static_cast<int>(d.x.size()) - static_cast<int>(parameter_vector(internal).size());
  r.converged = s.converged;
  r.iterations = s.iterations;
  r.weighted = weighted;
  r.chi2_history = s.history;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.curvature);
  const auto& ev = eig.eigenvalues();
  r.degenerate = !(ev.maxCoeff() > 0.0) || ev.minCoeff() <= 1e-12 * ev.maxCoeff();

  std::vector<std::optional<double>> errors(static_cast<std::size_t>(s.curvature.rows()));
  if (!r.degenerate) {
    const Eigen::MatrixXd cov =
        s.curvature.inverse() * (r.dof > 0 ? s.chi2 / r.dof : 1.0);
    for (Eigen::Index k = 0; k < cov.rows(); ++k) {
      errors[static_cast<std::size_t>(k)] = std::sqrt(std::max(cov(k, k), 0.0));
    }
  }

  // Canonical gauge flips only signs and shifts phi, so the errors carry
  // over unchanged; frequencies and rates scale back to physical units.
  const auto physical = canonicalize(to_physical(internal, d.scale));
  const auto values = parameter_vector(physical);
  const auto names = parameter_names(r.kind);
  for (std::size_t k = 0; k < names.size(); ++k) {
    FitParameter p;
    p.name = std::string(names[k]);
    p.value = values[k];
    if (errors[k]) {
      double e = *errors[k];
      if (p.name == "delta_f" || p.name == "gamma") e /= d.scale;
      p.std_error = e;
      p.weak = std::abs(p.value) < 2.0 * e;
    } else {
      p.weak = true;
    }
    r.params.push_back(std::move(p));
  }
  return r;
}

FitResult run_fit(const G2Curve& curve, G2ModelKind kind,
                  std::optional<G2Model> guess, const FitOptions& options) {
  const std::size_t min_points = kind == G2ModelKind::delay ? 4 : 5;
  if (curve.points.size() < min_points) {
    throw DomainError(fmt::format("{} fit needs at least {} points, got {}",
                                  to_string(kind), min_points, curve.points.size()));
  }
  if (kind == G2ModelKind::tau && curve.kind != XKind::tau) {
    throw DomainError("tau fit needs a curve with x = tau");
  }
  if (kind == G2ModelKind::delay && curve.kind == XKind::tau) {
    throw DomainError("delay fit needs a curve with x = t_delay or path_length");
  }
  if (options.max_iterations < 1 || options.starts < 1 ||
      !(options.band_low > 0.0) || !(options.band_high >= options.band_low)) {
    throw DomainError("invalid fit options");
  }
  const auto d = prepare(curve, kind, options.weighted);

  std::vector<G2Model> starts;
  if (guess) {
    if (guess->kind != kind) throw DomainError("initial guess has the wrong model kind");
    starts.push_back(to_internal(*guess, d.scale));
  } else {
    G2Model shape;
    shape.kind = kind;
    std::vector<double> gammas{0.0};
    if (kind == G2ModelKind::tau) {
      const double g0 = gamma_guess(d);
      gammas = {0.5 * g0, g0, 2.0 * g0};
    }
    for (double gamma : gammas) {
      shape.gamma = gamma;
      const double fc = coarse_frequency(d, shape);
      for (int k = 0; k < options.starts; ++k) {
        const double frac = options.starts == 1
                                ? 0.5
                                : static_cast<double>(k) / (options.starts - 1);
        const double f = fc * (options.band_low + frac * (options.band_high - options.band_low));
        starts.push_back(from_harmonic(shape, f, harmonic_fit(d, shape, f)));
      }
    }
  }

  const double f_max = std::max(nyquist(d), guess ? std::abs(starts.front().delta_f) : 0.0);
  std::optional<Solve> best;
  for (const auto& start : starts) {
    auto s = levenberg_marquardt(d, start, options.max_iterations, f_max);
    if (!best || (s.converged && !best->converged) ||
        (s.converged == best->converged && s.chi2 < best->chi2)) {
      best = std::move(s);
    }
  }
  return finish(d, *best, options.weighted);
}

std::string display_value(const FitParameter& p, G2ModelKind kind) {
  double scale = 1.0;
  std::string unit;
  if (p.name == "delta_f") {
    scale = kind == G2ModelKind::delay ? 1e9 : 1e6;
    unit = kind == G2ModelKind::delay ? " GHz" : " MHz";
  } else if (p.name == "gamma") {
    scale = 1e6;
    unit = " MHz";
  } else if (p.name == "phi") {
    unit = " rad";
  }
  if (!p.std_error) return fmt::format("{:.6g} (no error){}", p.value / scale, unit);
  return fmt::format("{:.6g} +/- {:.3g}{}", p.value / scale, *p.std_error / scale, unit);
}

}  // namespace

std::vector<std::string_view> parameter_names(G2ModelKind kind) {
  if (kind == G2ModelKind::delay) return {"epsilon", "phi", "delta_f"};
  return {"epsilon", "gamma", "phi", "delta_f"};
}

std::vector<double> parameter_vector(const G2Model& m) {
  if (m.kind == G2ModelKind::delay) return {m.epsilon, m.phi, m.delta_f};
  return {m.epsilon, m.gamma, m.phi, m.delta_f};
}

G2Model model_from_parameters(G2ModelKind kind, std::span<const double> p) {
  G2Model m;
  m.kind = kind;
  if (kind == G2ModelKind::delay) {
    if (p.size() != 3) throw DomainError("delay model has 3 parameters");
    m.epsilon = p[0];
    m.phi = p[1];
    m.delta_f = p[2];
  } else {
    if (p.size() != 4) throw DomainError("tau model has 4 parameters");
    m.epsilon = p[0];
    m.gamma = p[1];
    m.phi = p[2];
    m.delta_f = p[3];
  }
  return m;
}

double model_value(const G2Model& model, double x) {
  return model.kind == G2ModelKind::delay ? g2_zero_model(model, x)
                                          : g2_tau_model(model, x);
}

std::vector<double> model_gradient(const G2Model& m, double x) {
  const double arg = m.phi + 2.0 * kPi * m.delta_f * x;
  const double c = std::cos(arg);
  const double s = std::sin(arg);
  if (m.kind == G2ModelKind::delay) {
    return {0.5 * c, -0.5 * m.epsilon * s, -kPi * m.epsilon * x * s};
  }
  const double e = std::exp(-m.gamma * m.gamma * x * x);
  return {0.5 * e * c, -m.epsilon * m.gamma * x * x * e * c,
          -0.5 * m.epsilon * e * s, -kPi * m.epsilon * x * e * s};
}

G2Model canonicalize(const G2Model& model) {
  G2Model m = model;
  if (m.epsilon < 0.0) {
    m.epsilon = -m.epsilon;
    m.phi += kPi;
  }
  if (m.delta_f < 0.0) {
    m.delta_f = -m.delta_f;
    m.phi = -m.phi;
  }
  m.gamma = std::abs(m.gamma);
  m.phi = std::remainder(m.phi, 2.0 * kPi);
  if (m.phi <= -kPi) m.phi += 2.0 * kPi;
  return m;
}

const FitParameter& FitResult::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw DomainError(fmt::format("fit result has no parameter '{}'", name));
}

G2Model FitResult::model() const {
  std::vector<double> values;
  for (const auto& p : params) values.push_back(p.value);
  return model_from_parameters(kind, values);
}

G2Model initial_guess(const G2Curve& curve, G2ModelKind kind) {
  G2Model m;
  m.kind = kind;
  if (curve.points.empty()) throw DomainError("cannot guess from an empty curve");
  double lo = curve.points.front().g2;
  double hi = lo;
  for (const auto& p : curve.points) {
    lo = std::min(lo, p.g2);
    hi = std::max(hi, p.g2);
  }
  m.epsilon = hi - lo;
  bool weighted = std::all_of(curve.points.begin(), curve.points.end(),
                              [](const G2Point& p) { return p.sigma > 0.0; });
  try {
    const auto d = prepare(curve, kind, weighted);
    G2Model shape;
    shape.kind = kind;
    if (kind == G2ModelKind::tau) shape.gamma = gamma_guess(d);
    const double f = coarse_frequency(d, shape);
    const auto h = harmonic_fit(d, shape, f);
    shape.delta_f = f;
    shape.phi = std::atan2(-h.b, h.a);
    const auto physical = to_physical(shape, d.scale);
    m.delta_f = physical.delta_f;
    m.gamma = physical.gamma;
    m.phi = physical.phi;
  } catch (const DomainError&) {
    // Degenerate x values: fall back to unit frequency and rate.
    m.delta_f = 1.0;
    m.gamma = kind == G2ModelKind::tau ? 1.0 : 0.0;
    m.phi = 0.0;
  }
  return m;
}

FitResult fit_delay_model(const G2Curve& curve, std::optional<G2Model> guess,
                          const FitOptions& options) {
  return run_fit(curve, G2ModelKind::delay, guess, options);
}

FitResult fit_tau_model(const G2Curve& curve, std::optional<G2Model> guess,
                        const FitOptions& options) {
  return run_fit(curve, G2ModelKind::tau, guess, options);
}

std::string fit_to_json(const FitResult& r, int indent) {
  nlohmann::ordered_json j;
  j["model"] = std::string(to_string(r.kind));
  auto params = nlohmann::ordered_json::array();
  for (const auto& p : r.params) {
    nlohmann::ordered_json e;
    e["name"] = p.name;
    e["value"] = p.value;
    e["std_error"] = p.std_error ? nlohmann::ordered_json(*p.std_error)
                                 : nlohmann::ordered_json(nullptr);
    e["unit"] = p.name == "delta_f" ? "Hz" : p.name == "gamma" ? "1/s"
              : p.name == "phi"     ? "rad" : "";
    e["weak"] = p.weak;
    params.push_back(std::move(e));
  }
  j["params"] = std::move(params);
  j["chi2"] = r.chi2;
  j["dof"] = r.dof;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["degenerate"] = r.degenerate;
  j["weighted"] = r.weighted;
  return j.dump(indent);
}

std::string format_fit_table(const FitResult& r) {
  std::string out;
  for (const auto& p : r.params) {
    std::string label = p.name;
    if (p.name == "phi") label = r.kind == G2ModelKind::delay ? "phi0" : "phi1";
    if (p.name == "delta_f") label = r.kind == G2ModelKind::delay ? "delta_f21" : "delta_f3";
    out += fmt::format("{:<10} = {}{}\n", label, display_value(p, r.kind),
                       p.weak ? "  [weakly identified]" : "");
  }
  out += fmt::format("chi2 = {:.4g}, dof = {}, iterations = {}, converged = {}{}\n",
                     r.chi2, r.dof, r.iterations, r.converged ? "yes" : "no",
                     r.degenerate ? ", curvature singular" : "");
  return out;
}

}  // namespace chbt
