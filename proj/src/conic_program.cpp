#include "cutsteer/conic_program.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <ostream>
#include <sstream>

#include "cutsteer/error.hpp"

extern "C" {
#include "ecos.h"
}

namespace cutsteer::conic {

void AffineExpr::add(int row, VariableHandle v, int index, double coef) {
  if (row < 0 || row >= rows()) throw Error(ErrorCode::binding, "expression row out of range");
  if (v.id < 0 || index < 0 || index >= v.length) {
    throw Error(ErrorCode::binding, "variable index out of range",
                "var=" + std::to_string(v.id) + " index=" + std::to_string(index));
  }
  terms_.push_back({row, v.id, index, coef});
}

void AffineExpr::add_block(int row0, VariableHandle v, const Eigen::MatrixXd& block, int col0) {
  for (int c = 0; c < block.cols(); ++c)
    for (int r = 0; r < block.rows(); ++r)
      if (block(r, c) != 0.0) add(row0 + r, v, col0 + c, block(r, c));
}

void AffineExpr::add_diagonal(int row0, VariableHandle v, int count, double scale, int col0) {
  for (int r = 0; r < count; ++r) add(row0 + r, v, col0 + r, scale);
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

VariableHandle ConeProgram::add_variable(int length, std::string name) {
  if (length <= 0) throw Error(ErrorCode::invalid_argument, "variable length must be positive");
  VariableHandle h{static_cast<int>(lengths_.size()), length};
  lengths_.push_back(length);
  offsets_.push_back(total_);
  names_.push_back(std::move(name));
  total_ += length;
  return h;
}

void ConeProgram::validate(const AffineExpr& e) const {
  for (const Term& t : e.terms()) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw Error(ErrorCode::binding, "expression references an unknown variable",
                  "var=" + std::to_string(t.var));
    }
    if (t.index >= lengths_[t.var]) {
      throw Error(ErrorCode::binding, "expression index exceeds variable length",
                  "var=" + std::to_string(t.var));
    }
  }
}

int ConeProgram::add_constraint(ConeConstraint c) {
  validate(c.expr);
  if (c.expr.rows() < 1) throw Error(ErrorCode::binding, "empty constraint expression");
  if (c.kind == ConeKind::soc && c.expr.rows() < 2) {
    throw Error(ErrorCode::binding, "second-order cone needs at least two rows");
  }
  constraints_.push_back(std::move(c));
  return static_cast<int>(constraints_.size()) - 1;
}

Eigen::VectorXd evaluate(const AffineExpr& e, const Solution& s) {
  Eigen::VectorXd out = e.constant();
  for (const Term& t : e.terms()) out(t.row) += t.coef * s.values.at(t.var)(t.index);
  return out;
}

double max_violation(const ConeProgram& p, const Solution& s) {
  double worst = 0.0;
  for (int i = 0; i < p.num_constraints(); ++i) {
    const ConeConstraint& c = p.constraint(i);
    const Eigen::VectorXd v = evaluate(c.expr, s);
    double viol = 0.0;
    switch (c.kind) {
      case ConeKind::zero: viol = v.cwiseAbs().maxCoeff(); break;
      case ConeKind::nonneg: viol = std::max(0.0, -v.minCoeff()); break;
      case ConeKind::soc: viol = std::max(0.0, v.tail(v.size() - 1).norm() - v(0)); break;
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

void ConeProgram::dump(std::ostream& os, const AffineExpr* objective) const {
  os.precision(17);
  for (int i = 0; i < num_variables(); ++i) {
    os << "var " << i << ' ' << offsets_[i] << ' ' << lengths_[i] << ' '
       << (names_[i].empty() ? "-" : names_[i]) << '\n';
  }
  auto emit = [&](int id, const char* kind, const AffineExpr& e) {
    os << "con " << id << ' ' << kind << ' ' << e.rows() << '\n';
    for (const Term& t : e.terms())
      os << id << ' ' << offsets_[t.var] + t.index << ' ' << t.row << ' ' << t.coef << '\n';
    for (int r = 0; r < e.rows(); ++r)
      if (e.constant()(r) != 0.0) os << id << " -1 " << r << ' ' << e.constant()(r) << '\n';
  };
  if (objective) emit(-1, "objective", *objective);
  for (int i = 0; i < num_constraints(); ++i) {
    const ConeConstraint& c = constraints_[i];
    emit(i, c.kind == ConeKind::zero ? "zero" : c.kind == ConeKind::nonneg ? "nonneg" : "soc", c.expr);
  }
}

namespace {

struct Csc {
  std::vector<idxint> colptr;
  std::vector<idxint> rowind;
  std::vector<pfloat> values;
};

Csc to_csc(int rows, int cols, std::vector<Eigen::Triplet<double>>& trips) {
  Eigen::SparseMatrix<double, Eigen::ColMajor, long> m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(0.0);
  m.makeCompressed();
  Csc out;
  out.colptr.assign(m.outerIndexPtr(), m.outerIndexPtr() + cols + 1);
  out.rowind.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
  out.values.assign(m.valuePtr(), m.valuePtr() + m.nonZeros());
  if (out.values.empty()) {
    // ECOS dereferences the value arrays even for empty matrices
    out.rowind.push_back(0);
    out.values.push_back(0.0);
  }
  return out;
}

}  // namespace

Solution ConeProgram::solve(const AffineExpr& objective, const SolverSettings& settings) const {
  if (num_variables() == 0) throw Error(ErrorCode::invalid_argument, "program has no variables");
  validate(objective);
  if (objective.rows() != 1) throw Error(ErrorCode::binding, "objective must be scalar");

  const int n = total_;
  std::vector<double> c(n, 0.0);
  for (const Term& t : objective.terms()) c[offsets_[t.var] + t.index] += t.coef;

  Solution sol;
  if (constraints_.empty()) {
    bool zero = true;
    for (double v : c) zero = zero && v == 0.0;
    if (!zero) {
      sol.status = SolveStatus::unbounded;
      sol.diagnostics = "no constraints and a nonzero linear objective";
      return sol;
    }
    sol.status = SolveStatus::optimal;
    for (int i = 0; i < num_variables(); ++i) sol.values.push_back(Eigen::VectorXd::Zero(lengths_[i]));
    sol.objective = objective.constant()(0);
    return sol;
  }

  sol = run_ecos(objective, c, settings, false);
  if (sol.status == SolveStatus::numerical_failure && has_equalities()) {
    // rank-deficient equality blocks stall the KKT factorization; retry as paired inequalities
    Solution split = run_ecos(objective, c, settings, true);
    split.diagnostics = "equalities split: " + split.diagnostics + " (first attempt " + sol.diagnostics + ")";
    return split;
  }
  return sol;
}

bool ConeProgram::has_equalities() const {
  for (const auto& con : constraints_)
    if (con.kind == ConeKind::zero) return true;
  return false;
}

Solution ConeProgram::run_ecos(const AffineExpr& objective, std::vector<double> c,
                               const SolverSettings& settings, bool split_equalities) const {
  const int n = total_;
  Solution sol;
  // ECOS form: A x = b, G x + s = h with s in (R+^l x SOC...)
  std::vector<Eigen::Triplet<double>> at, gt;
  std::vector<double> b, h;
  std::vector<idxint> q;
  int p_rows = 0;
  int l_rows = 0;
  for (const auto& con : constraints_) {
    if (con.kind == ConeKind::zero && !split_equalities) {
      for (const Term& t : con.expr.terms()) at.emplace_back(p_rows + t.row, offsets_[t.var] + t.index, t.coef);
      for (int r = 0; r < con.expr.rows(); ++r) b.push_back(-con.expr.constant()(r));
      p_rows += con.expr.rows();
    }
  }
  for (const auto& con : constraints_) {
    if (con.kind == ConeKind::nonneg) {
      for (const Term& t : con.expr.terms()) gt.emplace_back(l_rows + t.row, offsets_[t.var] + t.index, -t.coef);
      for (int r = 0; r < con.expr.rows(); ++r) h.push_back(con.expr.constant()(r));
      l_rows += con.expr.rows();
    } else if (con.kind == ConeKind::zero && split_equalities) {
      for (double sign : {1.0, -1.0}) {
        for (const Term& t : con.expr.terms()) gt.emplace_back(l_rows + t.row, offsets_[t.var] + t.index, -sign * t.coef);
        for (int r = 0; r < con.expr.rows(); ++r) h.push_back(sign * con.expr.constant()(r));
        l_rows += con.expr.rows();
      }
    }
  }
  if (l_rows == 0) {
    // ECOS requires a nonempty orthant; 0 <= 1 is inert
    h.push_back(1.0);
    l_rows = 1;
  }
  int m_rows = l_rows;
  for (const auto& con : constraints_) {
    if (con.kind == ConeKind::soc) {
      for (const Term& t : con.expr.terms()) gt.emplace_back(m_rows + t.row, offsets_[t.var] + t.index, -t.coef);
      for (int r = 0; r < con.expr.rows(); ++r) h.push_back(con.expr.constant()(r));
      q.push_back(con.expr.rows());
      m_rows += con.expr.rows();
    }
  }

  Csc g = to_csc(m_rows, n, gt);
  Csc a;
  if (p_rows > 0) a = to_csc(p_rows, n, at);

  pwork* w = ECOS_setup(n, m_rows, p_rows, l_rows, static_cast<idxint>(q.size()),
                        q.empty() ? nullptr : q.data(), 0, g.values.data(), g.colptr.data(),
                        g.rowind.data(), p_rows ? a.values.data() : nullptr,
                        p_rows ? a.colptr.data() : nullptr, p_rows ? a.rowind.data() : nullptr,
                        c.data(), h.data(), p_rows ? b.data() : nullptr);
  if (!w) {
    sol.status = SolveStatus::numerical_failure;
    sol.diagnostics = "solver setup failed";
    return sol;
  }
  w->stgs->feastol = settings.feastol;
  w->stgs->abstol = settings.abstol;
  w->stgs->reltol = settings.reltol;
  w->stgs->feastol_inacc = std::max(1e-6, 100 * settings.feastol);
  w->stgs->abstol_inacc = std::max(1e-6, 100 * settings.abstol);
  w->stgs->reltol_inacc = std::max(1e-5, 100 * settings.reltol);
  w->stgs->maxit = settings.max_iters;
  w->stgs->verbose = 0;

  const idxint flag = ECOS_solve(w);
  sol.iterations = static_cast<int>(w->info->iter);
  std::ostringstream diag;
  diag << "exitflag=" << flag << " pres=" << w->info->pres << " dres=" << w->info->dres
       << " gap=" << w->info->gap << " iter=" << w->info->iter;
  sol.diagnostics = diag.str();

  switch (flag) {
    case ECOS_OPTIMAL:
    case ECOS_OPTIMAL + ECOS_INACC_OFFSET:
      sol.status = SolveStatus::optimal;
      sol.inaccurate = flag != ECOS_OPTIMAL;
      break;
    case ECOS_PINF:
    case ECOS_PINF + ECOS_INACC_OFFSET:
      sol.status = SolveStatus::infeasible;
      break;
    case ECOS_DINF:
    case ECOS_DINF + ECOS_INACC_OFFSET:
      sol.status = SolveStatus::unbounded;
      break;
    default:
      sol.status = SolveStatus::numerical_failure;
      break;
  }
  if (sol.status == SolveStatus::optimal) {
    for (int i = 0; i < num_variables(); ++i)
      sol.values.emplace_back(Eigen::Map<const Eigen::VectorXd>(w->x + offsets_[i], lengths_[i]));
    double obj = objective.constant()(0);
    for (int j = 0; j < n; ++j) obj += c[j] * w->x[j];
    sol.objective = obj;
  }
  ECOS_cleanup(w, 0);
  return sol;
}

}  // namespace cutsteer::conic
