#include "eon/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "eon/error.hpp"

namespace eon {

namespace {

void normalize(std::vector<std::pair<VarId, double>>& exps) {
  std::sort(exps.begin(), exps.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<VarId, double>> out;
  out.reserve(exps.size());
  for (const auto& [v, e] : exps) {
    if (!out.empty() && out.back().first == v) {
      out.back().second += e;
    } else {
      out.emplace_back(v, e);
    }
  }
  std::erase_if(out, [](const auto& p) { return p.second == 0.0; });
  exps = std::move(out);
}

}  // namespace

Monomial::Monomial(double c, std::vector<std::pair<VarId, double>> e) : coef(c), exps(std::move(e)) {
  normalize(exps);
}

Monomial& Monomial::pow(VarId v, double e) {
  exps.emplace_back(v, e);
  normalize(exps);
  return *this;
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r(coef * o.coef, exps);
  r.exps.insert(r.exps.end(), o.exps.begin(), o.exps.end());
  normalize(r.exps);
  return r;
}

double Monomial::exponent(VarId v) const {
  for (const auto& [id, e] : exps) {
    if (id == v) return e;
  }
  return 0.0;
}

double Monomial::evaluate(std::span<const double> x) const {
  double r = coef;
  for (const auto& [v, e] : exps) r *= std::pow(x[static_cast<std::size_t>(v)], e);
  return r;
}

Posynomial& Posynomial::operator+=(const Posynomial& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  return *this;
}

Posynomial& Posynomial::operator+=(Monomial m) {
  terms.push_back(std::move(m));
  return *this;
}

Posynomial Posynomial::operator*(const Posynomial& o) const {
  Posynomial r;
  r.terms.reserve(terms.size() * o.terms.size());
  for (const auto& a : terms) {
    for (const auto& b : o.terms) r.terms.push_back(a * b);
  }
  return r;
}

Posynomial Posynomial::operator*(const Monomial& m) const {
  Posynomial r;
  r.terms.reserve(terms.size());
  for (const auto& a : terms) r.terms.push_back(a * m);
  return r;
}

double Posynomial::evaluate(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.evaluate(x);
  return s;
}

Posynomial operator+(Posynomial a, const Posynomial& b) {
  a += b;
  return a;
}

VarId GpProgram::add_variable(std::string name, double initial) {
  if (!(initial > 0.0) || !std::isfinite(initial)) {
    throw InvalidArgument("initial value of '" + name + "' must be positive");
  }
  vars_.push_back(Variable{std::move(name), std::nullopt, initial});
  return static_cast<VarId>(vars_.size() - 1);
}

void GpProgram::add_bounds(VarId v, std::optional<double> lower, std::optional<double> upper,
                           const std::string& tag) {
  if (lower) {
    if (!(*lower > 0.0)) throw InvalidArgument("lower bound must be positive");
    add_constraint(tag, Monomial(*lower, {{v, -1.0}}));
  }
  if (upper) {
    if (!(*upper > 0.0)) throw InvalidArgument("upper bound must be positive");
    add_constraint(tag, Monomial(1.0 / *upper, {{v, 1.0}}));
  }
}

void GpProgram::set_objective(Posynomial p) { objective_ = std::move(p); }

std::size_t GpProgram::add_constraint(std::string tag, Posynomial lhs) {
  constraints_.push_back(GpConstraint{std::move(tag), std::move(lhs)});
  return constraints_.size() - 1;
}

void GpProgram::scale_constraint(std::size_t k, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidArgument("constraint scale factor must be positive");
  }
  for (auto& t : constraints_.at(k).lhs.terms) t.coef *= factor;
}

std::optional<VarId> GpProgram::find(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (vars_[i].name == name) return static_cast<VarId>(i);
  }
  return std::nullopt;
}

std::size_t GpProgram::free_variable_count() const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return !v.fixed; }));
}

void GpProgram::check() const {
  auto check_posy = [&](const Posynomial& p, const std::string& where) {
    if (p.empty()) throw InvalidArgument(where + ": empty posynomial");
    for (const auto& m : p.terms) {
      if (!(m.coef > 0.0) || !std::isfinite(m.coef)) {
        throw InvalidArgument(where + ": coefficient must be positive and finite");
      }
      for (const auto& [v, e] : m.exps) {
        if (v < 0 || static_cast<std::size_t>(v) >= vars_.size()) {
          throw InvalidArgument(where + ": undeclared variable " + std::to_string(v));
        }
        if (!std::isfinite(e)) throw InvalidArgument(where + ": non-finite exponent");
      }
    }
  };
  check_posy(objective_, "objective");
  for (const auto& c : constraints_) check_posy(c.lhs, "constraint " + c.tag);
}

GpProgram fix_variable(const GpProgram& program, VarId v, double value) {
  if (v < 0 || static_cast<std::size_t>(v) >= program.vars_.size()) {
    throw InvalidArgument("fix_variable: unknown variable " + std::to_string(v));
  }
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument("fix_variable: value must be positive");
  }
  GpProgram out = program;
  out.vars_[static_cast<std::size_t>(v)].fixed = value;
  auto fold = [&](Posynomial& p) {
    for (auto& m : p.terms) {
      const double e = m.exponent(v);
      if (e != 0.0) {
        m.coef *= std::pow(value, e);
        std::erase_if(m.exps, [&](const auto& pr) { return pr.first == v; });
      }
    }
  };
  fold(out.objective_);
  for (auto& c : out.constraints_) fold(c.lhs);
  return out;
}

GpProgram fix_variable(const GpProgram& program, const std::string& name, double value) {
  auto v = program.find(name);
  if (!v) throw InvalidArgument("fix_variable: unknown variable '" + name + "'");
  return fix_variable(program, *v, value);
}

GpProgram GpProgram::fixed(VarId v, double value) const { return fix_variable(*this, v, value); }

namespace {

void write_posy(std::ostream& os, const Posynomial& p, const std::vector<Variable>& vars) {
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const auto& m = p.terms[i];
    if (i > 0) os << " + ";
    os << m.coef;
    if (!m.exps.empty()) os << " *";
    for (const auto& [v, e] : m.exps) os << ' ' << vars[static_cast<std::size_t>(v)].name << '^' << e;
  }
}

}  // namespace

std::string to_text(const GpProgram& program) {
  std::ostringstream os;
  os.precision(12);
  os << "variables:";
  for (const auto& v : program.variables()) {
    os << ' ' << v.name;
    if (v.fixed) os << '=' << *v.fixed;
  }
  os << "\nminimize: ";
  write_posy(os, program.objective(), program.variables());
  os << "\nsubject to:\n";
  for (const auto& c : program.constraints()) {
    os << "  [" << c.tag << "] ";
    write_posy(os, c.lhs, program.variables());
    os << " <= 1\n";
  }
  return os.str();
}

double ConvexFunction::evaluate(std::span<const double> u, std::vector<double>* grad) const {
  // log-sum-exp with max shift
  std::vector<double> z(terms.size());
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    double s = terms[k].b;
    for (const auto& [j, a] : terms[k].a) s += a * u[static_cast<std::size_t>(j)];
    z[k] = s;
    zmax = std::max(zmax, s);
  }
  double sum = 0.0;
  for (double& zk : z) {
    zk = std::exp(zk - zmax);
    sum += zk;
  }
  if (grad) {
    std::fill(grad->begin(), grad->end(), 0.0);
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const double w = z[k] / sum;
      for (const auto& [j, a] : terms[k].a) (*grad)[static_cast<std::size_t>(j)] += w * a;
    }
  }
  return zmax + std::log(sum);
}

ConvexProblem convexify(const GpProgram& program) {
  program.check();
  ConvexProblem cp;
  const auto& vars = program.variables();
  std::vector<int> local(vars.size(), -1);
  std::vector<double> fixed_log(vars.size(), 0.0);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].fixed) {
      fixed_log[i] = std::log(*vars[i].fixed);
    } else {
      local[i] = static_cast<int>(cp.free_vars.size());
      cp.free_vars.push_back(static_cast<VarId>(i));
    }
  }
  auto convert = [&](const Posynomial& p) {
    ConvexFunction f;
    f.terms.reserve(p.terms.size());
    for (const auto& m : p.terms) {
      ConvexFunction::Term t;
      t.b = std::log(m.coef);
      for (const auto& [v, e] : m.exps) {
        const int j = local[static_cast<std::size_t>(v)];
        if (j < 0) {
          t.b += e * fixed_log[static_cast<std::size_t>(v)];
        } else {
          t.a.emplace_back(j, e);
        }
      }
      f.terms.push_back(std::move(t));
    }
    return f;
  };
  cp.objective = convert(program.objective());
  const auto& cons = program.constraints();
  for (std::size_t k = 0; k < cons.size(); ++k) {
    ConvexFunction f = convert(cons[k].lhs);
    const bool constant = std::all_of(f.terms.begin(), f.terms.end(),
                                      [](const ConvexFunction::Term& t) { return t.a.empty(); });
    if (constant) {
      // No free variables left: a pure feasibility check.
      if (f.evaluate({}) > 1e-12) cp.constant_infeasible = true;
      continue;
    }
    cp.constraints.push_back(std::move(f));
    cp.source.push_back(k);
  }
  return cp;
}

double max_violation(const GpProgram& program, std::span<const double> x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : program.constraints()) worst = std::max(worst, c.lhs.evaluate(x) - 1.0);
  return program.constraints().empty() ? 0.0 : worst;
}

std::string to_string(GpStatus s) {
  switch (s) {
    case GpStatus::optimal: return "optimal";
    case GpStatus::infeasible: return "infeasible";
    case GpStatus::max_iterations: return "max-iterations";
    case GpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

}  // namespace eon
