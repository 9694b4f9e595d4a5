#pragma once

// Posynomial representation of geometric programs, log-space convexification
// and a primal-dual interior-point solver for the resulting smooth problem.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eon {

using VarId = int;

struct SolverOptions {
  /// Relative dual-residual and duality-gap targets. An optimum whose
  /// residual exceeds 10 * kkt_tol is reported as a numerical failure.
  double kkt_tol = 1e-7;
  double gap_tol = 1e-9;
  /// Maximum posynomial constraint violation accepted at an optimum.
  double feas_tol = 1e-8;
  int max_iterations = 200;
};

/// coef * prod_k x_k^{e_k}. Exponents are kept sorted by variable with no
/// zero entries.
struct Monomial {
  double coef = 1.0;
  std::vector<std::pair<VarId, double>> exps;

  Monomial() = default;
  explicit Monomial(double c) : coef(c) {}
  Monomial(double c, std::vector<std::pair<VarId, double>> e);

  /// Multiplies in x_v^e.
  Monomial& pow(VarId v, double e);
  Monomial operator*(const Monomial& o) const;
  double exponent(VarId v) const;
  double evaluate(std::span<const double> x) const;
};

struct Posynomial {
  std::vector<Monomial> terms;

  Posynomial() = default;
  Posynomial(Monomial m) { terms.push_back(std::move(m)); }  // NOLINT

  Posynomial& operator+=(const Posynomial& o);
  Posynomial& operator+=(Monomial m);
  Posynomial operator*(const Posynomial& o) const;
  Posynomial operator*(const Monomial& m) const;
  double evaluate(std::span<const double> x) const;
  bool empty() const { return terms.empty(); }
};

Posynomial operator+(Posynomial a, const Posynomial& b);

struct Variable {
  std::string name;
  std::optional<double> fixed;
  /// Starting point for the solver; purely a hint.
  double initial = 1.0;
};

struct GpConstraint {
  std::string tag;
  Posynomial lhs;  // lhs <= 1
};

/// minimize objective(x) s.t. constraint_k(x) <= 1, x > 0.
class GpProgram {
 public:
  VarId add_variable(std::string name, double initial = 1.0);
  /// lower <= x_v <= upper as monomial rows (either bound may be omitted).
  void add_bounds(VarId v, std::optional<double> lower, std::optional<double> upper,
                  const std::string& tag = "bound");
  void set_objective(Posynomial p);
  std::size_t add_constraint(std::string tag, Posynomial lhs);
  /// Multiplies every coefficient of constraint `k` by `factor` > 0.
  void scale_constraint(std::size_t k, double factor);

  const std::vector<Variable>& variables() const { return vars_; }
  const Posynomial& objective() const { return objective_; }
  const std::vector<GpConstraint>& constraints() const { return constraints_; }
  std::optional<VarId> find(const std::string& name) const;
  std::size_t free_variable_count() const;
  std::size_t constraint_count() const { return constraints_.size(); }

  /// Throws InvalidArgument when a term references an undeclared variable,
  /// has a nonpositive/non-finite coefficient, or the objective is empty.
  void check() const;

  /// Returns a copy with `v` replaced by the constant `value`, folded into
  /// every monomial coefficient.
  GpProgram fixed(VarId v, double value) const;

 private:
  friend GpProgram fix_variable(const GpProgram&, VarId, double);
  std::vector<Variable> vars_;
  Posynomial objective_;
  std::vector<GpConstraint> constraints_;
};

GpProgram fix_variable(const GpProgram& program, VarId v, double value);
GpProgram fix_variable(const GpProgram& program, const std::string& name, double value);

/// Text form, one monomial per term: `coef * var^exp var^exp ...`.
std::string to_text(const GpProgram& program);

/// log(sum_k exp(a_k . u + b_k)) over dense local variable indices.
struct ConvexFunction {
  struct Term {
    std::vector<std::pair<int, double>> a;
    double b = 0.0;
  };
  std::vector<Term> terms;

  bool affine() const { return terms.size() == 1; }
  /// Value; when non-null, `grad` must already hold n entries and is overwritten.
  double evaluate(std::span<const double> u, std::vector<double>* grad = nullptr) const;
};

/// Program after the substitution x = exp(u) with fixed variables folded.
struct ConvexProblem {
  /// Local index -> program variable id.
  std::vector<VarId> free_vars;
  ConvexFunction objective;
  std::vector<ConvexFunction> constraints;
  /// Originating GpProgram constraint index of each convex constraint.
  std::vector<std::size_t> source;
  /// Set when a constraint without free variables is violated.
  bool constant_infeasible = false;

  std::size_t n() const { return free_vars.size(); }
};

ConvexProblem convexify(const GpProgram& program);

enum class GpStatus { optimal, infeasible, max_iterations, numerical_failure };
std::string to_string(GpStatus s);

struct GpSolution {
  GpStatus status = GpStatus::numerical_failure;
  /// Indexed by VarId; fixed variables carry their fixed value.
  std::vector<double> values;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == GpStatus::optimal; }
  double value(VarId v) const { return values.at(static_cast<std::size_t>(v)); }
};

/// Maximum of lhs_k(x) - 1 over all constraints (<= 0 when feasible).
double max_violation(const GpProgram& program, std::span<const double> x);

GpSolution solve(const GpProgram& program, const SolverOptions& options = {});

}  // namespace eon
