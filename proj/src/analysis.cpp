#include "vbs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "vbs/errors.hpp"

namespace vbs {

double AreaLawFit::evaluate(double boundary_size) const {
  return c * std::pow(boundary_size, -delta) + alpha;
}

void validate_dataset(const ScalingDataset& data) {
  std::set<int> sizes;
  for (const auto& p : data.points) {
    if (p.boundary_size < 1) throw UsageError("dataset: boundary sizes must be >= 1");
    if (!sizes.insert(p.boundary_size).second)
      throw UsageError("dataset: boundary size " + std::to_string(p.boundary_size) + " appears twice");
    if (!(p.per_bond > 0) || p.per_bond > std::numbers::ln2 + 1e-9)
      throw UsageError("dataset: entropy per bond outside (0, ln 2]");
    if (p.stderr_ < 0 || !std::isfinite(p.stderr_)) throw UsageError("dataset: negative or non-finite error");
  }
}

namespace {

struct Problem {
  Eigen::VectorXd l, y, w;

  Eigen::VectorXd residual(const Eigen::Vector3d& p) const {
    Eigen::VectorXd r(l.size());
    for (Eigen::Index i = 0; i < l.size(); ++i) r(i) = y(i) - (p(0) * std::pow(l(i), -p(1)) + p(2));
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::Vector3d& p) const {
    Eigen::MatrixXd j(l.size(), 3);
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      const double t = std::pow(l(i), -p(1));
      j(i, 0) = t;
      j(i, 1) = -p(0) * std::log(l(i)) * t;
      j(i, 2) = 1;
    }
    return j;
  }

  double objective(const Eigen::Vector3d& p) const {
    const Eigen::VectorXd r = residual(p);
    return r.cwiseProduct(w).dot(r);
  }
};

}  // namespace

AreaLawFit fit_area_law(const ScalingDataset& data) {
  constexpr int kMaxIterations = 500;
  constexpr int kMaxHalvings = 10;
  validate_dataset(data);
  const auto n = static_cast<Eigen::Index>(data.points.size());
  if (n < 4) throw UsageError("fit_area_law needs at least 4 points, got " + std::to_string(n));

  auto pts = data.points;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.boundary_size < b.boundary_size; });
  const bool weighted = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.stderr_ > 0; });
  Problem prob;
  prob.l.resize(n);
  prob.y.resize(n);
  prob.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    prob.l(i) = pts[i].boundary_size;
    prob.y(i) = pts[i].per_bond;
    prob.w(i) = weighted ? 1 / (pts[i].stderr_ * pts[i].stderr_) : 1.0;
  }

  Eigen::Vector3d p(prob.y(0) - prob.y(n - 1), 1.0, prob.y(n - 1));
  p(0) *= prob.l(0);
  double obj = prob.objective(p);

  AreaLawFit fit;
  fit.points = static_cast<int>(n);
  const Eigen::VectorXd sw = prob.w.cwiseSqrt();
  bool converged = false;
  for (int it = 1; it <= kMaxIterations && !converged; ++it) {
    fit.iterations = it;
    const Eigen::MatrixXd jw = sw.asDiagonal() * prob.jacobian(p);
    const Eigen::VectorXd rw = sw.cwiseProduct(prob.residual(p));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(jw);
    if (qr.rank() < 3) {
      std::ostringstream msg;
      msg << "fit_area_law: rank-deficient Jacobian (rank " << qr.rank() << ") at C=" << p(0)
          << " Delta=" << p(1) << " alpha=" << p(2);
      throw NumericalError(msg.str());
    }
    Eigen::Vector3d step = qr.solve(rw);

    Eigen::Vector3d trial = p;
    double trial_obj = obj;
    bool reduced = false;
    double scale = 1;
    for (int h = 0; h < kMaxHalvings; ++h, scale /= 2) {
      trial = p + scale * step;
      trial_obj = prob.objective(trial);
      if (std::isfinite(trial_obj) && trial_obj < obj) {
        reduced = true;
        break;
      }
    }
    if (!reduced) {
      // Damped normal equations with growing damping.
      fit.damped = true;
      const Eigen::Matrix3d jtj = jw.transpose() * jw;
      const Eigen::Vector3d g = jw.transpose() * rw;
      double mu = 1e-3 * jtj.diagonal().maxCoeff();
      for (int k = 0; k < 30 && !reduced; ++k, mu *= 10) {
        Eigen::Matrix3d a = jtj;
        a.diagonal() += mu * jtj.diagonal();
        step = a.ldlt().solve(g);
        trial = p + step;
        trial_obj = prob.objective(trial);
        reduced = std::isfinite(trial_obj) && trial_obj < obj;
      }
    }
    if (!reduced) {
      converged = true;  // no descent direction left: at the minimum to working precision
      break;
    }
    const double change = ((trial - p).cwiseAbs().array() / p.cwiseAbs().array().max(1e-300)).maxCoeff();
    p = trial;
    obj = trial_obj;
    if (change < 1e-10) converged = true;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "fit_area_law: no convergence after " << kMaxIterations << " iterations (C=" << p(0)
        << " Delta=" << p(1) << " alpha=" << p(2) << ", objective " << obj << ")";
    throw NumericalError(msg.str());
  }

  const Eigen::MatrixXd jw = sw.asDiagonal() * prob.jacobian(p);
  const Eigen::VectorXd rw = sw.cwiseProduct(prob.residual(p));
  const Eigen::Matrix3d jtj = jw.transpose() * jw;
  const double dof = static_cast<double>(n - 3);
  const double s2 = dof > 0 ? rw.squaredNorm() / dof : 0.0;
  fit.covariance = s2 * jtj.inverse();
  fit.c = p(0);
  fit.delta = p(1);
  fit.alpha = p(2);
  fit.c_err = std::sqrt(std::max(0.0, fit.covariance(0, 0)));
  fit.delta_err = std::sqrt(std::max(0.0, fit.covariance(1, 1)));
  fit.alpha_err = std::sqrt(std::max(0.0, fit.covariance(2, 2)));
  fit.residual_norm = rw.norm();
  fit.gradient_norm = (jw.transpose() * rw).norm();
  return fit;
}

std::string format_with_uncertainty(double value, double error) {
  std::ostringstream s;
  if (!(error > 0) || !std::isfinite(error)) {
    s << std::fixed << std::setprecision(7) << value;
    return s.str();
  }
  int d = static_cast<int>(std::floor(std::log10(error)));
  long digit = std::lround(error / std::pow(10.0, d));
  if (digit >= 10) {
    ++d;
    digit = std::lround(error / std::pow(10.0, d));
  }
  const int decimals = std::max(0, -d);
  s << std::fixed << std::setprecision(decimals) << value << '(' << digit * (d > 0 ? static_cast<long>(std::pow(10, d)) : 1)
    << ')';
  return s.str();
}

ExtrapolationReport extrapolation_report(const AreaLawFit& fit) {
  ExtrapolationReport r;
  r.alpha = fit.alpha;
  r.alpha_err = fit.alpha_err;
  r.gap_to_ln2 = std::numbers::ln2 - fit.alpha;
  r.below_ln2 = fit.alpha < std::numbers::ln2 - 3 * fit.alpha_err;
  std::ostringstream form;
  form << std::setprecision(6) << "S = " << fit.alpha << " |L| + " << fit.c << " |L|^" << 1 - fit.delta;
  r.area_law_form = form.str();
  std::ostringstream sum;
  sum << "C = " << format_with_uncertainty(fit.c, fit.c_err)
      << ", Delta = " << format_with_uncertainty(fit.delta, fit.delta_err)
      << ", alpha = " << format_with_uncertainty(fit.alpha, fit.alpha_err) << "; ln 2 - alpha = " << std::fixed
      << std::setprecision(7) << r.gap_to_ln2 << (r.below_ln2 ? " (alpha < ln 2 - 3 sigma)" : " (not resolved from ln 2)");
  r.summary = sum.str();
  return r;
}

std::string fitted_curve(const AreaLawFit& fit, double from, double to, int samples) {
  if (samples < 2 || !(to > from) || from <= 0) throw UsageError("fitted_curve: bad range");
  std::ostringstream s;
  s << std::setprecision(10);
  for (int i = 0; i < samples; ++i) {
    const double l = from + (to - from) * i / (samples - 1);
    s << l << ' ' << fit.evaluate(l) << '\n';
  }
  return s.str();
}

}  // namespace vbs
