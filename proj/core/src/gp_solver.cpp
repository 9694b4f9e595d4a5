// Interior-point (barrier) method for the log-space form of a GP:
//
//   minimize f0(u)  s.t.  f_i(u) <= 0,
//
// where every f_i is a log-sum-exp of affine terms. Each centering step is a
// damped Newton step on t f0 + phi; the Newton systems are solved with a
// sparse LDL^T factorization whose pattern is analyzed once per phase.

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eon/error.hpp"
#include "eon/gp.hpp"

namespace eon {

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Kind { lse, affine };

struct Compiled {
  Kind kind = Kind::lse;
  std::vector<int> support;
  std::vector<std::vector<std::pair<int, double>>> terms;  // (support position, coefficient)
  std::vector<double> b;
  // Lower-triangular slots of the dense support block in the sparse value array.
  std::vector<int> slots;
};

Compiled compile(const ConvexFunction& f, Kind kind) {
  Compiled c;
  c.kind = kind;
  for (const auto& t : f.terms) {
    for (const auto& [j, a] : t.a) c.support.push_back(j);
  }
  std::sort(c.support.begin(), c.support.end());
  c.support.erase(std::unique(c.support.begin(), c.support.end()), c.support.end());
  for (const auto& t : f.terms) {
    std::vector<std::pair<int, double>> local;
    local.reserve(t.a.size());
    for (const auto& [j, a] : t.a) {
      const auto pos = std::lower_bound(c.support.begin(), c.support.end(), j) - c.support.begin();
      local.emplace_back(static_cast<int>(pos), a);
    }
    c.terms.push_back(std::move(local));
    c.b.push_back(t.b);
  }
  return c;
}

struct Eval {
  double value = 0.0;
  std::vector<double> grad;     // over support
  std::vector<double> weights;  // per term
};

/// Returns false when the value is not finite.
bool evaluate(const Compiled& f, const VectorXd& u, Eval& out) {
  const std::size_t nt = f.terms.size();
  out.grad.assign(f.support.size(), 0.0);
  out.weights.resize(nt);
  double zmax = -kInf;
  for (std::size_t k = 0; k < nt; ++k) {
    double z = f.b[k];
    for (const auto& [p, a] : f.terms[k]) z += a * u[f.support[static_cast<std::size_t>(p)]];
    out.weights[k] = z;
    zmax = std::max(zmax, z);
  }
  if (!std::isfinite(zmax)) return false;
  switch (f.kind) {
    case Kind::affine: {
      out.value = out.weights[0];
      out.weights[0] = 1.0;
      for (const auto& [p, a] : f.terms[0]) out.grad[static_cast<std::size_t>(p)] += a;
      return true;
    }
    case Kind::lse: {
      double sum = 0.0;
      for (double& w : out.weights) {
        w = std::exp(w - zmax);
        sum += w;
      }
      out.value = zmax + std::log(sum);
      for (std::size_t k = 0; k < nt; ++k) {
        out.weights[k] /= sum;
        for (const auto& [p, a] : f.terms[k]) out.grad[static_cast<std::size_t>(p)] += out.weights[k] * a;
      }
      return std::isfinite(out.value);
    }
  }
  return false;
}

/// Sparse symmetric pattern (lower triangle) with slot lookup.
class Pattern {
 public:
  Pattern(int n, std::vector<Compiled>& cons, Compiled& obj) : n_(n) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < n; ++i) trips.emplace_back(i, i, 0.0);
    auto add_block = [&](const std::vector<int>& idx) {
      for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
          const int r = std::max(idx[a], idx[b]);
          const int c = std::min(idx[a], idx[b]);
          trips.emplace_back(r, c, 0.0);
        }
      }
    };
    for (auto& c : cons) add_block(c.support);
    if (obj.kind == Kind::lse) add_block(obj.support);
    mat_.resize(n, n);
    mat_.setFromTriplets(trips.begin(), trips.end());
    mat_.makeCompressed();
    for (auto& c : cons) {
      c.slots.clear();
      for (std::size_t a = 0; a < c.support.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) c.slots.push_back(slot(c.support[a], c.support[b]));
      }
    }
    if (obj.kind == Kind::lse) {
      obj.slots.clear();
      for (std::size_t a = 0; a < obj.support.size(); ++a) {
        for (std::size_t b = 0; b <= a; ++b) obj.slots.push_back(slot(obj.support[a], obj.support[b]));
      }
    }
    for (int i = 0; i < n; ++i) diag_.push_back(slot(i, i));
  }

  int slot(int i, int j) const {
    const int r = std::max(i, j);
    const int c = std::min(i, j);
    const int* rows = mat_.innerIndexPtr();
    const int* begin = rows + mat_.outerIndexPtr()[c];
    const int* end = rows + mat_.outerIndexPtr()[c + 1];
    const int* it = std::lower_bound(begin, end, r);
    return static_cast<int>(it - rows);
  }

  SpMat& matrix() { return mat_; }
  const std::vector<int>& diag() const { return diag_; }
  int n() const { return n_; }

 private:
  int n_;
  SpMat mat_;
  std::vector<int> diag_;
};

struct PhaseResult {
  GpStatus status = GpStatus::numerical_failure;
  VectorXd u;
  double objective = 0.0;
  double rel_dual = 0.0;
  double rel_gap = 0.0;
  int iterations = 0;
  std::string message;
};

struct StopRule {
  // Phase 1 stops as soon as the objective (the slack s) drops below this,
  // or reports infeasible once the dual bound on s turns positive.
  std::optional<double> target;
};

/// Barrier method from a strictly feasible `u0`: damped Newton centering on
/// psi_t = f0 + phi / t, phi = -sum log(-f_i), then t <- mu t. The dual
/// estimate at a centre is lambda_i = 1 / (t (-f_i)) with duality gap m / t.
PhaseResult barrier(std::vector<Compiled>& cons, Compiled& obj, int n, VectorXd u0, const SolverOptions& opt,
                    const StopRule& stop) {
  PhaseResult res;
  res.u = std::move(u0);
  const std::size_t m = cons.size();
  Pattern pattern(n, cons, obj);
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  ldlt.analyzePattern(pattern.matrix());

  std::vector<Eval> ev(m), ev_new(m);
  Eval eobj, eobj_new;
  auto eval_at = [&](const VectorXd& u, std::vector<Eval>& e, Eval& eo) {
    if (!evaluate(obj, u, eo)) return false;
    for (std::size_t i = 0; i < m; ++i) {
      if (!evaluate(cons[i], u, e[i]) || !(e[i].value < 0.0)) return false;
    }
    return true;
  };
  if (!eval_at(res.u, ev, eobj)) {
    res.message = "starting point not strictly feasible";
    return res;
  }

  const double mu = 10.0;
  const double md = std::max(1.0, static_cast<double>(m));
  double t = md / std::max(1.0, std::abs(eobj.value));
  VectorXd grad0(n), rhs(n), du(n), u_new(n), rdual(n);
  std::vector<double> block;

  auto psi = [&](const std::vector<Eval>& e, const Eval& eo) {
    double v = eo.value;
    for (std::size_t i = 0; i < m; ++i) v -= std::log(-e[i].value) / t;
    return v;
  };

  int iter = 0;
  while (true) {
    // Centering.
    bool centred = false;
    while (iter < opt.max_iterations) {
      grad0.setZero();
      for (std::size_t p = 0; p < obj.support.size(); ++p) grad0[obj.support[p]] += eobj.grad[p];
      rhs = -grad0;
      double dual_scale = std::max(1.0, grad0.norm());
      SpMat& H = pattern.matrix();
      double* vals = H.valuePtr();
      std::fill(vals, vals + H.nonZeros(), 0.0);
      // Dense support block of w * Hess(lse) + r1 * g g^T.
      auto add_lse_block = [&](const Compiled& c, const Eval& e, double w0, double r1) {
        const std::size_t ns = c.support.size();
        block.assign(ns * (ns + 1) / 2, 0.0);
        if (c.kind == Kind::lse) {
          for (std::size_t k = 0; k < c.terms.size(); ++k) {
            const double w = w0 * e.weights[k];
            if (w == 0.0) continue;
            for (const auto& [pa, aa] : c.terms[k]) {
              for (const auto& [pb, ab] : c.terms[k]) {
                if (pb > pa) continue;
                block[static_cast<std::size_t>(pa) * (static_cast<std::size_t>(pa) + 1) / 2 + static_cast<std::size_t>(pb)] += w * aa * ab;
              }
            }
          }
        }
        std::size_t s = 0;
        for (std::size_t a = 0; a < ns; ++a) {
          for (std::size_t b = 0; b <= a; ++b, ++s) block[s] += r1 * e.grad[a] * e.grad[b];
        }
        for (s = 0; s < block.size(); ++s) vals[c.slots[s]] += block[s];
      };
      if (obj.kind == Kind::lse) add_lse_block(obj, eobj, 1.0, -1.0);
      for (std::size_t i = 0; i < m; ++i) {
        const Compiled& c = cons[i];
        const Eval& e = ev[i];
        const double negf = -e.value;
        const double l = 1.0 / (t * negf);
        add_lse_block(c, e, l, l / negf - (c.kind == Kind::lse ? l : 0.0));
        double gn = 0.0;
        for (std::size_t a = 0; a < c.support.size(); ++a) {
          rhs[c.support[a]] -= l * e.grad[a];
          gn += e.grad[a] * e.grad[a];
        }
        dual_scale = std::max(dual_scale, l * std::sqrt(gn));
      }
      res.objective = eobj.value;
      res.rel_dual = rhs.norm() / dual_scale;

      double maxdiag = 0.0;
      for (int d : pattern.diag()) maxdiag = std::max(maxdiag, std::abs(vals[d]));
      double reg = 1e-14 * std::max(1e-300, maxdiag);
      bool factored = false;
      for (int attempt = 0; attempt < 10 && !factored; ++attempt) {
        for (int d : pattern.diag()) vals[d] += reg;
        ldlt.factorize(H);
        factored = ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
        reg *= 100.0;
      }
      if (!factored) {
        res.status = GpStatus::numerical_failure;
        res.message = "Newton system factorization failed";
        res.iterations = iter;
        return res;
      }
      du = ldlt.solve(rhs);
      if (!du.allFinite()) {
        res.status = GpStatus::numerical_failure;
        res.message = "non-finite Newton step";
        res.iterations = iter;
        return res;
      }
      const double decrement = rhs.dot(du);  // lambda(u)^2 for psi_t
      // Dual residual with the Newton-corrected multipliers
      // lambda_i = (1/t + lambda_i g_i.du) / (-f_i), which resolve the stiff
      // directions the barrier estimate 1 / (t (-f_i)) cannot.
      rdual = grad0;
      for (std::size_t i = 0; i < m; ++i) {
        const Compiled& c = cons[i];
        const double negf = -ev[i].value;
        double gdu = 0.0;
        for (std::size_t a = 0; a < c.support.size(); ++a) gdu += ev[i].grad[a] * du[c.support[a]];
        const double lp = std::max(0.0, (1.0 + gdu / negf) / (t * negf));
        for (std::size_t a = 0; a < c.support.size(); ++a) rdual[c.support[a]] += lp * ev[i].grad[a];
      }
      res.rel_dual = std::min(res.rel_dual, rdual.norm() / dual_scale);
      const double psi0 = psi(ev, eobj);
      // The corrected multipliers cancel the residual of any Newton system,
      // so they certify a centre only inside the quadratic region
      // (t lambda^2 <= 1/4). Below the resolution of psi further Newton steps
      // cannot make progress.
      if (decrement * t <= 1e-9 || (res.rel_dual <= opt.kkt_tol && decrement * t <= 0.25) ||
          decrement <= 1e-14 * std::max(1.0, std::abs(psi0))) {
        centred = true;
        break;
      }
      ++iter;

      double step = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
        u_new = res.u + step * du;
        if (!eval_at(u_new, ev_new, eobj_new)) continue;
        if (psi(ev_new, eobj_new) <= psi0 - 0.01 * step * decrement) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // The decrement is at the resolution of psi; treat the point as centred.
        centred = decrement * t <= 1e-3;
        if (!centred) {
          res.status = GpStatus::numerical_failure;
          res.message = "line search failed";
          res.iterations = iter;
          return res;
        }
        break;
      }
      res.u = u_new;
      std::swap(ev, ev_new);
      std::swap(eobj, eobj_new);
      if (res.u.cwiseAbs().maxCoeff() > 700.0) {
        res.status = GpStatus::numerical_failure;
        res.message = "iterates diverge (problem unbounded?)";
        res.iterations = iter;
        return res;
      }
      if (stop.target && eobj.value < *stop.target) {
        res.objective = eobj.value;
        res.status = GpStatus::optimal;
        res.iterations = iter;
        return res;
      }
    }
    res.iterations = iter;
    res.objective = eobj.value;
    res.rel_gap = static_cast<double>(m) / t / std::max(1.0, std::abs(eobj.value));
    if (!centred) {
      res.status = GpStatus::max_iterations;
      res.message = "iteration limit reached";
      return res;
    }
    if (stop.target && eobj.value < *stop.target) {
      res.status = GpStatus::optimal;
      return res;
    }
    // At a centre f0 - m/t bounds the optimum from below.
    if (stop.target && eobj.value - static_cast<double>(m) / t > 0.0) {
      res.status = GpStatus::infeasible;
      return res;
    }
    if (res.rel_gap <= opt.gap_tol) {
      res.status = GpStatus::optimal;
      return res;
    }
    if (m == 0) {
      res.status = GpStatus::optimal;
      return res;
    }
    t *= mu;
  }
}

}  // namespace

GpSolution solve(const GpProgram& program, const SolverOptions& options) {
  ConvexProblem cp = convexify(program);
  GpSolution sol;
  const auto& vars = program.variables();
  sol.values.resize(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) sol.values[i] = vars[i].fixed.value_or(vars[i].initial);

  auto finish = [&](GpStatus st, const std::string& msg) {
    sol.status = st;
    sol.message = msg;
    sol.objective = program.objective().evaluate(sol.values);
    sol.max_violation = max_violation(program, sol.values);
    return sol;
  };

  if (cp.constant_infeasible) return finish(GpStatus::infeasible, "constant constraint violated");
  const int n = static_cast<int>(cp.n());
  if (n == 0) {
    sol.max_violation = max_violation(program, sol.values);
    return finish(sol.max_violation <= options.feas_tol ? GpStatus::optimal : GpStatus::infeasible,
                  "all variables fixed");
  }

  VectorXd u(n);
  for (int j = 0; j < n; ++j) u[j] = std::log(vars[static_cast<std::size_t>(cp.free_vars[static_cast<std::size_t>(j)])].initial);

  std::vector<Compiled> cons;
  cons.reserve(cp.constraints.size());
  for (const auto& f : cp.constraints) cons.push_back(compile(f, f.affine() ? Kind::affine : Kind::lse));

  double worst = -kInf;
  {
    Eval e;
    std::vector<double> uu(u.data(), u.data() + n);
    for (const auto& c : cp.constraints) worst = std::max(worst, c.evaluate(uu));
  }

  int total_iterations = 0;
  if (!cons.empty() && !(worst < -1e-9)) {
    // Phase 1: minimize s s.t. f_i(u) - s <= 0, s >= -1.
    std::vector<Compiled> p1;
    p1.reserve(cons.size() + 1);
    for (const auto& f : cp.constraints) {
      ConvexFunction g = f;
      for (auto& t : g.terms) t.a.emplace_back(n, -1.0);
      p1.push_back(compile(g, g.affine() ? Kind::affine : Kind::lse));
    }
    ConvexFunction lower;
    lower.terms.push_back({{{n, -1.0}}, -1.0});
    p1.push_back(compile(lower, Kind::affine));
    ConvexFunction sobj;
    sobj.terms.push_back({{{n, 1.0}}, 0.0});
    Compiled o1 = compile(sobj, Kind::affine);
    VectorXd us(n + 1);
    us.head(n) = u;
    us[n] = std::max(worst, -0.5) + 1.0;
    PhaseResult r1 = barrier(p1, o1, n + 1, us, options, StopRule{-1e-2});
    total_iterations += r1.iterations;
    if (r1.status == GpStatus::numerical_failure) {
      sol.iterations = total_iterations;
      return finish(GpStatus::numerical_failure, "phase 1: " + r1.message);
    }
    u = r1.u.head(n);
    std::vector<double> uu(u.data(), u.data() + n);
    worst = -kInf;
    for (const auto& c : cp.constraints) worst = std::max(worst, c.evaluate(uu));
    if (!(worst < 0.0)) {
      sol.iterations = total_iterations;
      if (r1.status == GpStatus::max_iterations) return finish(GpStatus::max_iterations, "phase 1 iteration limit");
      return finish(GpStatus::infeasible, "no strictly feasible point (phase 1 optimum s = " +
                                              std::to_string(r1.objective) + ")");
    }
  }

  Compiled obj = compile(cp.objective, cp.objective.affine() ? Kind::affine : Kind::lse);
  PhaseResult r2 = barrier(cons, obj, n, u, options, StopRule{});
  total_iterations += r2.iterations;
  sol.iterations = total_iterations;
  for (int j = 0; j < n; ++j) sol.values[static_cast<std::size_t>(cp.free_vars[static_cast<std::size_t>(j)])] = std::exp(r2.u[j]);
  sol.kkt_residual = std::max(r2.rel_dual, r2.rel_gap);
  finish(r2.status, r2.message);
  if (sol.status == GpStatus::optimal && sol.max_violation > options.feas_tol) {
    sol.status = GpStatus::numerical_failure;
    sol.message = "constraint violation above tolerance at reported optimum";
  }
  if (sol.status == GpStatus::optimal && sol.kkt_residual > 10.0 * options.kkt_tol) {
    sol.status = GpStatus::numerical_failure;
    sol.message = "KKT residual above tolerance at reported optimum";
  }
  return sol;
}

}  // namespace eon
