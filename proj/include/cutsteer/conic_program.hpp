#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace cutsteer::conic {

struct VariableHandle {
  int id = -1;
  int length = 0;
};

/// One nonzero coefficient: expr[row] += coef * var[index].
struct Term {
  int row;
  int var;
  int index;
  double coef;

  bool operator==(const Term&) const = default;
};

class AffineExpr {
 public:
  AffineExpr() = default;
  explicit AffineExpr(int rows) : constant_(Eigen::VectorXd::Zero(rows)) {}

  int rows() const { return static_cast<int>(constant_.size()); }

  void add(int row, VariableHandle v, int index, double coef);
  /// expr[row0 + r] += sum_c block(r, c) * v[col0 + c]; exact zeros are skipped.
  void add_block(int row0, VariableHandle v, const Eigen::MatrixXd& block, int col0 = 0);
  /// expr[row0 + r] += scale * v[col0 + r] for r < count.
  void add_diagonal(int row0, VariableHandle v, int count, double scale, int col0 = 0);

  Eigen::VectorXd& constant() { return constant_; }
  const Eigen::VectorXd& constant() const { return constant_; }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
  Eigen::VectorXd constant_;
};

enum class ConeKind { zero, nonneg, soc };

/// zero: expr == 0; nonneg: expr >= 0; soc: expr[0] >= ||expr[1:]||.
struct ConeConstraint {
  ConeKind kind;
  AffineExpr expr;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

const char* status_name(SolveStatus s);

struct SolverSettings {
  double feastol = 1e-9;
  double abstol = 1e-9;
  double reltol = 1e-9;
  int max_iters = 150;
};

struct Solution {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<Eigen::VectorXd> values;  // per variable id, empty unless optimal
  double objective = 0.0;
  int iterations = 0;
  bool inaccurate = false;  // solver reached reduced accuracy only
  std::string diagnostics;

  const Eigen::VectorXd& value(VariableHandle v) const { return values.at(v.id); }
};

class ConeProgram {
 public:
  VariableHandle add_variable(int length, std::string name = {});
  int add_constraint(ConeConstraint c);

  int num_variables() const { return static_cast<int>(lengths_.size()); }
  int num_scalars() const { return total_; }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  int variable_length(int id) const { return lengths_.at(id); }
  int variable_offset(int id) const { return offsets_.at(id); }
  const std::string& variable_name(int id) const { return names_.at(id); }
  const ConeConstraint& constraint(int id) const { return constraints_.at(id); }

  Solution solve(const AffineExpr& objective, const SolverSettings& settings = {}) const;

  /// Sparse text dump. Lines:
  ///   var <id> <offset> <length> <name>
  ///   con <id> <kind> <rows>
  ///   <constraint id> <variable column> <row> <value>   (one per nonzero)
  ///   <constraint id> -1 <row> <value>                  (nonzero constants)
  /// The objective is written as constraint id -1 with kind "objective".
  void dump(std::ostream& os, const AffineExpr* objective = nullptr) const;

 private:
  void validate(const AffineExpr& e) const;
  bool has_equalities() const;
  Solution run_ecos(const AffineExpr& objective, std::vector<double> c,
                    const SolverSettings& settings, bool split_equalities) const;

  std::vector<int> lengths_;
  std::vector<int> offsets_;
  std::vector<std::string> names_;
  int total_ = 0;
  std::vector<ConeConstraint> constraints_;
};

/// Evaluates an expression at a solution.
Eigen::VectorXd evaluate(const AffineExpr& e, const Solution& s);

/// Largest violation of any stored constraint at the given solution.
double max_violation(const ConeProgram& p, const Solution& s);

}  // namespace cutsteer::conic
