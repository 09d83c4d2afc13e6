#include "lipext/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lipext {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

const char* to_string(FeasibilityStatus s) {
  switch (s) {
  case FeasibilityStatus::Feasible:
    return "feasible";
  case FeasibilityStatus::Infeasible:
    return "infeasible";
  case FeasibilityStatus::Unknown:
    return "unknown";
  }
  return "unknown";
}

Vec project(const ConstraintSet& set, const Vec& p, const Tolerances& tol) {
  return std::visit(overloaded{[&](const BallSet& b) { return project_ball(p, b.center, b.radius); },
                               [&](const HalfspaceSet& h) { return project_halfspace(p, h.normal, h.offset); },
                               [&](const HullSet& h) { return project_hull(p, h.generators).point; },
                               [&](const ShiftedSet& s) { return s.project(p, tol); }},
                    set);
}

double distance(const ConstraintSet& set, const Vec& p, const Tolerances& tol) {
  return std::visit(
      overloaded{[&](const BallSet& b) { return std::max(0.0, (p - b.center).norm() - b.radius); },
                 [&](const HalfspaceSet& h) {
                   return std::max(0.0, (h.offset - h.normal.dot(p)) / h.normal.norm());
                 },
                 [&](const auto&) { return (project(set, p, tol) - p).norm(); }},
      set);
}

Eigen::Index dimension(const ConstraintSet& set) {
  return std::visit(overloaded{[](const BallSet& b) { return b.center.size(); },
                               [](const HalfspaceSet& h) { return h.normal.size(); },
                               [](const HullSet& h) { return h.generators.rows(); },
                               [](const ShiftedSet& s) { return s.shift.size(); }},
                    set);
}

void ConstraintSystem::validate() const {
  if (dimension < 1)
    throw DimensionError("constraint system: dimension must be positive");
  for (const auto& s : sets) {
    if (lipext::dimension(s) != dimension)
      throw DimensionError("constraint system: set of dimension " + std::to_string(lipext::dimension(s)) +
                           " in a system of dimension " + std::to_string(dimension));
    std::visit(overloaded{[](const BallSet& b) {
                            if (!(b.radius >= 0.0))
                              throw PreconditionError("ball constraint: negative radius");
                          },
                          [](const HalfspaceSet& h) {
                            if (!(h.normal.squaredNorm() > 0.0))
                              throw PreconditionError("half-space constraint: zero normal");
                          },
                          [](const HullSet& h) {
                            if (h.generators.cols() == 0)
                              throw PreconditionError("hull constraint: no generators");
                          },
                          [](const ShiftedSet& s) {
                            if (s.body.dimension() != s.shift.size())
                              throw DimensionError("shifted body: shift dimension mismatch");
                          }},
               s);
  }
}

Vec ConstraintSystem::default_start() const {
  Vec sum = Vec::Zero(dimension);
  long count = 0;
  for (const auto& s : sets) {
    if (const auto* b = std::get_if<BallSet>(&s)) {
      sum += b->center;
      ++count;
    } else if (const auto* h = std::get_if<HullSet>(&s)) {
      sum += h->generators.rowwise().sum();
      count += h->generators.cols();
    }
  }
  return count > 0 ? Vec(sum / static_cast<double>(count)) : sum;
}

double ConstraintSystem::residual(const Vec& p, const Tolerances& tol) const {
  double r = 0.0;
  for (const auto& s : sets)
    r = std::max(r, distance(s, p, tol));
  return r;
}

FeasibilityOutcome dykstra_solve(const ConstraintSystem& sys, const Vec& start, const Tolerances& tol) {
  sys.validate();
  tol.validate();
  if (start.size() != sys.dimension)
    throw DimensionError("dykstra_solve: start has wrong dimension");
  require_finite(start, "dykstra_solve start");

  FeasibilityOutcome out;
  out.point = start;
  if (sys.sets.empty()) {
    out.status = FeasibilityStatus::Feasible;
    return out;
  }

  Vec x = start;
  std::vector<Vec> increments(sys.sets.size(), Vec::Zero(sys.dimension));
  // Stopping needs a fixed point: every inner iterate stable across cycles
  // and equal to its predecessor, i.e. the increments stopped changing. The
  // end-of-cycle iterate alone can stall while the increments still drift.
  std::vector<Vec> inner(sys.sets.size(), Vec::Constant(sys.dimension, std::numeric_limits<double>::infinity()));
  long cycle = 0;
  while (cycle < tol.max_iter) {
    ++cycle;
    double change = 0.0;
    for (std::size_t i = 0; i < sys.sets.size(); ++i) {
      const Vec y = x + increments[i];
      const Vec prev = x;
      x = project(sys.sets[i], y, tol);
      increments[i] = y - x;
      change = std::max({change, (x - inner[i]).norm(), (x - prev).norm()});
      inner[i] = x;
    }
    if (change < tol.solve_tol)
      break;
  }
  out.point = x;
  out.iterations = cycle;
  out.residual = sys.residual(x, tol);
  out.status = out.residual <= tol.feas_tol ? FeasibilityStatus::Feasible : FeasibilityStatus::Unknown;
  return out;
}

InfeasibilityProbe infeasibility_probe(const ConstraintSystem& sys, const Vec& start, const Tolerances& tol) {
  sys.validate();
  tol.validate();
  if (start.size() != sys.dimension)
    throw DimensionError("infeasibility_probe: start has wrong dimension");

  InfeasibilityProbe probe;
  Vec y = start;
  if (!sys.sets.empty()) {
    const double count = static_cast<double>(sys.sets.size());
    while (probe.iterations < tol.max_iter) {
      ++probe.iterations;
      Vec next = Vec::Zero(sys.dimension);
      for (const auto& s : sys.sets)
        next += project(s, y, tol);
      next /= count;
      const double step = (next - y).norm();
      y = std::move(next);
      if (step < tol.solve_tol) {
        probe.converged = true;
        break;
      }
    }
  } else {
    probe.converged = true;
  }
  probe.witness = y;
  double sq = 0.0;
  for (const auto& s : sys.sets) {
    const double d = distance(s, y, tol);
    sq += d * d;
    probe.residual_lb = std::max(probe.residual_lb, d);
  }
  probe.rms_bound = sys.sets.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(sys.sets.size()));
  return probe;
}

namespace {

// Signed constraint g(y) <= 0 with its gradient.
struct Signed {
  double value;
  Vec grad;
};

void signed_ball(std::vector<Signed>& out, const Vec& y, const Vec& c, double r) {
  const Vec d = y - c;
  const double n = d.norm();
  if (n > 0.0)
    out.push_back({n - r, d / n});
  else
    out.push_back({-r, Vec::Zero(y.size())});
}

void signed_halfspace(std::vector<Signed>& out, const Vec& y, const Vec& normal, double offset) {
  const double nn = normal.norm();
  out.push_back({(offset - normal.dot(y)) / nn, -normal / nn});
}

std::vector<Signed> signed_constraints(const ConstraintSystem& sys, const Vec& y) {
  std::vector<Signed> out;
  for (const auto& s : sys.sets) {
    std::visit(overloaded{[&](const BallSet& b) { signed_ball(out, y, b.center, b.radius); },
                          [&](const HalfspaceSet& h) { signed_halfspace(out, y, h.normal, h.offset); },
                          [](const HullSet&) {},
                          [&](const ShiftedSet& sh) {
                            std::visit(overloaded{[&](const Ball& b) {
                                                    signed_ball(out, y, sh.shift + b.center, b.radius);
                                                  },
                                                  [&](const HalfspaceIntersection& hs) {
                                                    for (const auto& h : hs.constraints)
                                                      signed_halfspace(out, y, h.normal,
                                                                       h.offset + h.normal.dot(sh.shift));
                                                  },
                                                  [](const WholeSpace&) {}},
                                       sh.body.variant());
                          }},
               s);
  }
  return out;
}

// Dykstra crawls when the intersection is thin, e.g. tangent balls whose
// only common point is forced. Near such a point, treat the nearly active
// constraints as equations and take minimum-norm Gauss-Newton steps inside
// the affine hull of the hull face the iterate projects onto.
std::optional<Vec> refine(const ConstraintSystem& sys, const Vec& from, double band, const Tolerances& tol) {
  const Eigen::Index d = sys.dimension;
  Vec origin = Vec::Zero(d);
  Mat basis = Mat::Identity(d, d);
  // Barycentric coordinates beta = weight_map (y - origin) of a simplex face;
  // empty when the face generators are affinely dependent.
  Mat weight_map;
  double scale = 1.0;
  for (const auto& s : sys.sets) {
    const auto* h = std::get_if<HullSet>(&s);
    if (!h)
      continue;
    const Mat& gens = h->generators;
    const auto face = [&](const std::vector<Eigen::Index>& idx) {
      Mat dirs(d, static_cast<Eigen::Index>(idx.size()) - 1);
      for (std::size_t j = 1; j < idx.size(); ++j)
        dirs.col(static_cast<Eigen::Index>(j) - 1) = gens.col(idx[j]) - gens.col(idx.front());
      return dirs;
    };
    std::vector<Eigen::Index> all(static_cast<std::size_t>(gens.cols()));
    for (Eigen::Index j = 0; j < gens.cols(); ++j)
      all[static_cast<std::size_t>(j)] = j;
    std::vector<Eigen::Index> idx = all;
    Mat dirs = face(idx);
    Eigen::ColPivHouseholderQR<Mat> qr(d, std::max<Eigen::Index>(dirs.cols(), 1));
    if (dirs.cols() > 0) {
      qr.compute(dirs);
      if (qr.rank() < dirs.cols()) {
        const auto proj = project_hull(from, gens);
        idx.clear();
        for (Eigen::Index j = 0; j < proj.weights.size(); ++j)
          if (proj.weights(j) > 0.0)
            idx.push_back(j);
        dirs = face(idx);
        if (dirs.cols() > 0)
          qr.compute(dirs);
      }
    }
    origin = gens.col(idx.front());
    if (dirs.cols() == 0) {
      basis.resize(d, 0);
    } else {
      basis = Mat(qr.householderQ()).leftCols(qr.rank());
      if (qr.rank() == dirs.cols()) {
        weight_map = Eigen::CompleteOrthogonalDecomposition<Mat>(dirs).pseudoInverse();
        scale = dirs.colwise().norm().maxCoeff();
      }
    }
    // Restricting to more than one hull is not needed by any caller.
    break;
  }

  const auto constraints = [&](const Vec& p) {
    auto cons = signed_constraints(sys, p);
    if (weight_map.size() > 0) {
      const Vec beta = weight_map * (p - origin);
      for (Eigen::Index j = 0; j < beta.size(); ++j)
        cons.push_back({-scale * beta(j), Vec(-scale * weight_map.row(j).transpose())});
      cons.push_back({scale * (beta.sum() - 1.0), Vec(scale * weight_map.colwise().sum().transpose())});
    }
    return cons;
  };

  Vec z = basis.transpose() * (from - origin);
  Vec y = origin + basis * z;
  if (basis.cols() == 0)
    return sys.residual(y, tol) <= tol.feas_tol ? std::optional<Vec>(y) : std::nullopt;

  const auto violation = [&](const Vec& p) {
    double v = 0.0;
    for (const auto& c : constraints(p))
      v += c.value > 0.0 ? c.value * c.value : 0.0;
    return v;
  };
  double merit = violation(y);
  const double enough = 1e-6 * tol.feas_tol * tol.feas_tol;
  for (int it = 0; it < 200 && merit > enough; ++it) {
    const auto cons = constraints(y);
    std::vector<const Signed*> active;
    for (const auto& c : cons)
      if (c.value > -band)
        active.push_back(&c);
    Mat jac(static_cast<Eigen::Index>(active.size()), basis.cols());
    Vec rhs(jac.rows());
    for (Eigen::Index i = 0; i < jac.rows(); ++i) {
      jac.row(i) = active[static_cast<std::size_t>(i)]->grad.transpose() * basis;
      rhs(i) = -active[static_cast<std::size_t>(i)]->value;
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(jac);
    cod.setThreshold(1e-10);
    const Vec step = cod.solve(rhs);
    if (!step.allFinite())
      return std::nullopt;
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Vec trial = origin + basis * (z + t * step);
      const double m = violation(trial);
      if (m < merit) {
        z += t * step;
        y = trial;
        merit = m;
        moved = true;
        break;
      }
    }
    if (!moved || t * step.norm() <= 1e-3 * tol.feas_tol)
      break;
  }
  if (sys.residual(y, tol) <= tol.feas_tol)
    return y;
  return std::nullopt;
}

} // namespace

FeasibilityOutcome solve(const ConstraintSystem& sys, const Vec& start, const Tolerances& tol) {
  FeasibilityOutcome out = dykstra_solve(sys, start, tol);
  if (out.status == FeasibilityStatus::Feasible)
    return out;
  if (out.point.allFinite()) {
    for (double factor : {0.0, 10.0, 100.0}) {
      if (auto y = refine(sys, out.point, factor * out.residual, tol)) {
        out.point = *y;
        out.residual = sys.residual(*y, tol);
        out.status = FeasibilityStatus::Feasible;
        return out;
      }
    }
  }
  InfeasibilityProbe probe = infeasibility_probe(sys, start, tol);
  if (probe.converged && probe.residual_lb > tol.feas_tol)
    out.status = FeasibilityStatus::Infeasible;
  out.probe = std::move(probe);
  return out;
}

FeasibilityOutcome solve(const ConstraintSystem& sys, const Tolerances& tol) {
  sys.validate();
  return solve(sys, sys.default_start(), tol);
}

} // namespace lipext
