#include <algorithm>
#include <cmath>
#include <random>

#include "septensor/error.hpp"
#include "septensor/inverse.hpp"

namespace septensor {
namespace {

struct Layout {
  std::vector<std::size_t> free;   // field dimension of each free parameter
  std::vector<std::size_t> fixed;  // remaining dimensions, in order
};

Layout make_layout(const FieldSpace& space, const std::vector<std::string>& free_dims) {
  Layout l;
  std::vector<char> is_free(space.num_dims(), 0);
  for (const auto& name : free_dims) {
    const std::size_t d = space.index_of(name);
    if (space.dim(d).kind != DimKind::Param)
      throw ConfigError("free dimension '" + name + "' is not a param dimension");
    if (is_free[d]) throw ConfigError("free dimension '" + name + "' listed twice");
    is_free[d] = 1;
    l.free.push_back(d);
  }
  for (std::size_t d = 0; d < space.num_dims(); ++d)
    if (!is_free[d]) l.fixed.push_back(d);
  return l;
}

}  // namespace

double eval_param_grad(const SeparableField& field, std::span<const double> point, std::size_t d) {
  const std::size_t dims = field.num_dims();
  if (point.size() != dims) throw InvalidArgument("point dimension does not match field");
  if (d >= dims) throw InvalidArgument("dimension index out of range");
  std::vector<BasisEval> ev;
  ev.reserve(dims);
  for (std::size_t e = 0; e < dims; ++e) ev.push_back(field.space().shape(e).eval(point[e]));
  double s = 0.0;
  for (std::size_t m = 0; m < field.num_modes(); ++m) {
    double prod = ev[d].interpolate_derivative(field.coeffs(m, d));
    for (std::size_t e = 0; e < dims && prod != 0.0; ++e)
      if (e != d) prod *= ev[e].interpolate(field.coeffs(m, e));
    s += prod;
  }
  return s;
}

TargetField sample_target(const SeparableField& field, const std::vector<std::string>& free_dims,
                          std::span<const double> params,
                          const std::vector<std::vector<double>>& points) {
  const Layout l = make_layout(field.space(), free_dims);
  if (params.size() != l.free.size()) throw InvalidArgument("one value per free dimension required");
  TargetField t;
  std::vector<double> full(field.num_dims());
  for (const auto& p : points) {
    if (p.size() != l.fixed.size()) throw InvalidArgument("target point has wrong length");
    for (std::size_t j = 0; j < l.free.size(); ++j) full[l.free[j]] = params[j];
    for (std::size_t j = 0; j < l.fixed.size(); ++j) full[l.fixed[j]] = p[j];
    t.points.push_back(p);
    t.values.push_back(field.evaluate(full));
  }
  return t;
}

InverseResult invert(const SeparableField& field, const TargetField& target,
                     const InverseConfig& cfg) {
  if (target.points.empty()) throw InvalidArgument("inverse problem needs target samples");
  if (target.points.size() != target.values.size())
    throw InvalidArgument("target points and values differ in length");
  const FieldSpace& space = field.space();
  const Layout l = make_layout(space, cfg.free_dims);
  const std::size_t nf = l.free.size();
  if (nf == 0) throw ConfigError("no free dimensions to recover");
  if (cfg.box.size() != nf) throw ConfigError("box needs one interval per free dimension");
  for (std::size_t j = 0; j < nf; ++j) {
    const auto [lo, hi] = cfg.box[j];
    const Mesh1D& mesh = space.dim(l.free[j]).mesh;
    if (!(lo <= hi) || !mesh.contains(lo) || !mesh.contains(hi))
      throw ConfigError("box for '" + cfg.free_dims[j] + "' must lie inside its domain");
  }
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (cfg.restarts == 0) throw ConfigError("at least one restart required");

  // Contraction of every mode over the fixed dimensions, per sample.
  const std::size_t ns = target.points.size();
  const std::size_t nm = field.num_modes();
  std::vector<double> fixed_part(ns * nm, 1.0);
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& p = target.points[s];
    if (p.size() != l.fixed.size())
      throw InvalidArgument("target point " + std::to_string(s) + " has wrong length");
    for (std::size_t j = 0; j < l.fixed.size(); ++j) {
      BasisEval ev;
      try {
        ev = space.shape(l.fixed[j]).eval(p[j]);
      } catch (const OutOfDomain& err) {
        throw OutOfDomain("target point " + std::to_string(s) + ": " + err.what());
      }
      for (std::size_t m = 0; m < nm; ++m)
        fixed_part[s * nm + m] *= ev.interpolate(field.coeffs(m, l.fixed[j]));
    }
  }

  std::vector<double> lo(nf);
  std::vector<double> width(nf);
  for (std::size_t j = 0; j < nf; ++j) {
    lo[j] = cfg.box[j].first;
    width[j] = cfg.box[j].second - cfg.box[j].first;
  }
  auto to_param = [&](const std::vector<double>& z) {
    std::vector<double> x(nf);
    for (std::size_t j = 0; j < nf; ++j)
      x[j] = std::clamp(lo[j] + z[j] * width[j], cfg.box[j].first, cfg.box[j].second);
    return x;
  };

  // Loss and gradient with respect to normalized coordinates.
  std::vector<double> val(nf * nm);
  std::vector<double> der(nf * nm);
  std::vector<double> resid(ns);
  auto evaluate = [&](const std::vector<double>& x, std::vector<double>* grad) {
    for (std::size_t j = 0; j < nf; ++j) {
      const BasisEval ev = space.shape(l.free[j]).eval(x[j]);
      for (std::size_t m = 0; m < nm; ++m) {
        val[j * nm + m] = ev.interpolate(field.coeffs(m, l.free[j]));
        der[j * nm + m] = ev.interpolate_derivative(field.coeffs(m, l.free[j]));
      }
    }
    double rr = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      double pred = 0.0;
      for (std::size_t m = 0; m < nm; ++m) {
        double prod = fixed_part[s * nm + m];
        for (std::size_t j = 0; j < nf; ++j) prod *= val[j * nm + m];
        pred += prod;
      }
      resid[s] = pred - target.values[s];
      rr += resid[s] * resid[s];
    }
    const double norm = std::sqrt(rr);
    if (grad) {
      // The norm is not differentiable at zero; use the squared loss there.
      const double scale = norm < 1e-14 ? 2.0 : 1.0 / norm;
      grad->assign(nf, 0.0);
      for (std::size_t s = 0; s < ns; ++s) {
        if (resid[s] == 0.0) continue;
        for (std::size_t m = 0; m < nm; ++m)
          for (std::size_t j = 0; j < nf; ++j) {
            double prod = fixed_part[s * nm + m] * der[j * nm + m];
            for (std::size_t i = 0; i < nf; ++i)
              if (i != j) prod *= val[i * nm + m];
            (*grad)[j] += scale * resid[s] * prod;
          }
      }
      for (std::size_t j = 0; j < nf; ++j) (*grad)[j] *= width[j];
    }
    return norm;
  };

  InverseResult result;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double best_overall = INFINITY;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    RestartTrace trace;
    std::vector<double> z(nf);
    for (std::size_t j = 0; j < nf; ++j) z[j] = width[j] > 0.0 ? uniform(rng) : 0.0;
    std::vector<double> x = to_param(z);
    trace.initial = x;
    std::vector<double> grad(nf);
    double loss = evaluate(x, &grad);
    trace.loss.push_back(loss);
    trace.best_loss.push_back(loss);
    trace.iterates.push_back(x);
    std::vector<double> best_x = x;
    double best = loss;

    bool all_fixed = std::all_of(width.begin(), width.end(), [](double w) { return w == 0.0; });
    if (all_fixed) trace.converged = true;
    std::vector<double> m1(nf, 0.0);
    std::vector<double> m2(nf, 0.0);
    double rate = cfg.learning_rate;
    std::size_t since_best = 0;
    const double beta1 = 0.9;
    const double beta2 = 0.999;
    for (std::size_t step = 1; step <= cfg.max_steps && !trace.converged; ++step) {
      double gnorm = 0.0;
      for (double g : grad) gnorm += g * g;
      if (std::sqrt(gnorm) < cfg.grad_tol) {
        trace.converged = true;
        break;
      }
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t j = 0; j < nf; ++j) {
        if (width[j] == 0.0) continue;
        m1[j] = beta1 * m1[j] + (1.0 - beta1) * grad[j];
        m2[j] = beta2 * m2[j] + (1.0 - beta2) * grad[j] * grad[j];
        z[j] -= rate * (m1[j] / c1) / (std::sqrt(m2[j] / c2) + 1e-12);
        z[j] = std::clamp(z[j], 0.0, 1.0);
      }
      x = to_param(z);
      loss = evaluate(x, &grad);
      ++trace.steps;
      if (!std::isfinite(loss)) throw SolverError("inverse loss became non-finite");
      trace.loss.push_back(loss);
      trace.iterates.push_back(x);
      if (loss < best) {
        best = loss;
        best_x = x;
        since_best = 0;
      } else if (++since_best >= cfg.plateau_patience) {
        rate *= 0.5;
        since_best = 0;
        // Resume from the best point with fresh moments.
        for (std::size_t j = 0; j < nf; ++j)
          z[j] = width[j] > 0.0 ? (best_x[j] - lo[j]) / width[j] : 0.0;
        x = best_x;
        loss = evaluate(x, &grad);
        std::fill(m1.begin(), m1.end(), 0.0);
        std::fill(m2.begin(), m2.end(), 0.0);
        if (rate < cfg.min_rate_ratio * cfg.learning_rate) trace.converged = true;
      }
      trace.best_loss.push_back(best);
    }
    trace.estimate = best_x;
    if (best < best_overall) {
      best_overall = best;
      result.best_restart = r;
      result.estimate = best_x;
      result.loss = best;
      result.converged = trace.converged;
    }
    result.restarts.push_back(std::move(trace));
  }
  return result;
}

}  // namespace septensor
