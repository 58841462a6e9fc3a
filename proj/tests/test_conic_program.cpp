#include <random>
#include <sstream>

#include "cutsteer/conic_program.hpp"
#include "cutsteer/error.hpp"
#include "cutsteer/moment_algebra.hpp"
#include "doctest.h"

using namespace cutsteer;
using namespace cutsteer::conic;

TEST_CASE("variables") {
  ConeProgram p;
  const auto a = p.add_variable(3);
  const auto b = p.add_variable(2);
  CHECK(a.id != b.id);
  CHECK(p.variable_length(a.id) == 3);
  CHECK(b.length == 2);
  CHECK(p.num_scalars() == 5);
  CHECK_THROWS_AS(p.add_variable(0), Error);
}

TEST_CASE("zero cone pins a variable") {
  ConeProgram p;
  const auto x = p.add_variable(1);
  AffineExpr e(1);
  e.add(0, x, 0, 1.0);
  e.constant()(0) = -3.0;
  p.add_constraint({ConeKind::zero, e});
  AffineExpr obj(1);
  obj.add(0, x, 0, 1.0);
  const Solution s = p.solve(obj);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.value(x)(0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(max_violation(p, s) <= 1e-8);
}

TEST_CASE("unit ball support") {
  ConeProgram p;
  const auto x = p.add_variable(3);
  AffineExpr e(4);
  e.constant()(0) = 1.0;
  e.add_diagonal(1, x, 3, 1.0);
  p.add_constraint({ConeKind::soc, e});
  AffineExpr obj(1);
  obj.add(0, x, 0, -1.0);
  const Solution s = p.solve(obj);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.value(x)(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(max_violation(p, s) <= 1e-8);
}

TEST_CASE("contradictory equalities are infeasible") {
  ConeProgram p;
  const auto x = p.add_variable(1);
  for (double v : {1.0, 2.0}) {
    AffineExpr e(1);
    e.add(0, x, 0, 1.0);
    e.constant()(0) = -v;
    p.add_constraint({ConeKind::zero, e});
  }
  AffineExpr obj(1);
  obj.add(0, x, 0, 1.0);
  CHECK(p.solve(obj).status == SolveStatus::infeasible);
}

TEST_CASE("unbounded objective") {
  ConeProgram p;
  const auto x = p.add_variable(2);
  AffineExpr obj(1);
  obj.add(0, x, 1, 1.0);
  const Solution s = p.solve(obj);
  CHECK(s.status == SolveStatus::unbounded);
  CHECK(s.values.empty());

  AffineExpr ge(1);
  ge.add(0, x, 0, 1.0);
  p.add_constraint({ConeKind::nonneg, ge});
  AffineExpr down(1);
  down.add(0, x, 0, -1.0);
  CHECK(p.solve(down).status == SolveStatus::unbounded);
}

TEST_CASE("epigraph of a Euclidean distance") {
  ConeProgram p;
  const auto v = p.add_variable(4);
  const auto t = p.add_variable(1);
  Eigen::Vector4d a(1.0, -2.0, 0.5, 3.0);
  AffineExpr e(5);
  e.add(0, t, 0, 1.0);
  e.add_diagonal(1, v, 4, 1.0);
  e.constant().tail(4) = -a;
  p.add_constraint({ConeKind::soc, e});
  AffineExpr obj(1);
  obj.add(0, t, 0, 1.0);
  const Solution s = p.solve(obj);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK((s.value(v) - Eigen::VectorXd(a)).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(std::abs(s.objective) <= 1e-7);
}

TEST_CASE("norm of a fixed product") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(3, 6);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  Eigen::VectorXd z(6);
  for (int i = 0; i < 6; ++i) z(i) = nd(rng);

  ConeProgram p;
  const auto zv = p.add_variable(6);
  const auto t = p.add_variable(1);
  AffineExpr pin(6);
  pin.add_diagonal(0, zv, 6, 1.0);
  pin.constant() = -z;
  p.add_constraint({ConeKind::zero, pin});
  AffineExpr cone(4);
  cone.add(0, t, 0, 1.0);
  cone.add_block(1, zv, m);
  p.add_constraint({ConeKind::soc, cone});
  AffineExpr obj(1);
  obj.add(0, t, 0, 1.0);
  const Solution s = p.solve(obj);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.objective == doctest::Approx(moments::spectral_norm(m * z)).epsilon(1e-8));
}

TEST_CASE("constraints round trip and dump") {
  ConeProgram p;
  const auto x = p.add_variable(2, "x");
  AffineExpr e(2);
  e.add(0, x, 1, 0.1 + 0.2);
  e.add(1, x, 0, -7.25);
  e.constant()(1) = 1.0 / 3.0;
  const int id = p.add_constraint({ConeKind::nonneg, e});
  const ConeConstraint& back = p.constraint(id);
  CHECK(back.kind == ConeKind::nonneg);
  CHECK(back.expr.terms() == e.terms());
  CHECK(back.expr.constant() == e.constant());

  std::ostringstream os;
  p.dump(os);
  const std::string text = os.str();
  CHECK(text.find("var 0 0 2 x") != std::string::npos);
  CHECK(text.find("con 0 nonneg 2") != std::string::npos);
  CHECK(text.find("0 1 0 0.30000000000000004") != std::string::npos);
  CHECK(text.find("0 -1 1 0.33333333333333331") != std::string::npos);

  AffineExpr bad(1);
  CHECK_THROWS_AS(bad.add(0, x, 2, 1.0), Error);
  AffineExpr stray(1);
  stray.add(0, VariableHandle{7, 3}, 1, 1.0);
  CHECK_THROWS_AS(p.add_constraint({ConeKind::zero, stray}), Error);
  AffineExpr tiny(1);
  tiny.add(0, x, 0, 1.0);
  CHECK_THROWS_AS(p.add_constraint({ConeKind::soc, tiny}), Error);
}

TEST_CASE("independent feasibility check on a random program") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  ConeProgram p;
  const auto x = p.add_variable(10);
  const auto t = p.add_variable(1);
  Eigen::MatrixXd a(4, 10);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
  AffineExpr eq(4);
  eq.add_block(0, x, a);
  eq.constant() = Eigen::Vector4d(1, -1, 0.5, 2);
  p.add_constraint({ConeKind::zero, eq});
  AffineExpr box(20);
  box.add_diagonal(0, x, 10, 1.0);
  box.add_diagonal(10, x, 10, -1.0);
  box.constant().setConstant(3.0);
  p.add_constraint({ConeKind::nonneg, box});
  AffineExpr cone(11);
  cone.add(0, t, 0, 1.0);
  cone.add_diagonal(1, x, 10, 1.0);
  p.add_constraint({ConeKind::soc, cone});
  AffineExpr obj(1);
  obj.add(0, t, 0, 1.0);
  for (int i = 0; i < 10; ++i) obj.add(0, x, i, 0.1 * nd(rng));
  const Solution s = p.solve(obj);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(max_violation(p, s) <= 1e-8);
  const Solution again = p.solve(obj);
  CHECK(again.values[0] == s.values[0]);
}
