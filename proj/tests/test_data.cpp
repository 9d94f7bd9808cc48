#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "subnewton/data.hpp"
#include "subnewton/methods.hpp"
#include "subnewton/problem.hpp"
#include "subnewton/rng.hpp"
#include "test_support.hpp"

using namespace subnewton;

namespace {
Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return read_libsvm(in, "inline");
}
}  // namespace

TEST_CASE("libsvm parsing basics") {
  const Dataset ds = parse("1 1:0.5 3:2.0\n");
  CHECK(ds.num_examples() == 1);
  CHECK(ds.num_features() == 3);
  CHECK(to_dense(ds.features).entries() == Vector{0.5, 0.0, 2.0});
  CHECK(ds.labels == std::vector<int>{1});
}

TEST_CASE("label conventions") {
  CHECK(parse("0 2:1.0\n1 1:1\n").labels == std::vector<int>{-1, 1});
  CHECK(parse("2 1:1\n1 1:1\n").labels == std::vector<int>{-1, 1});
  CHECK(parse("-1 1:1\n+1 1:1\n").labels == std::vector<int>{-1, 1});
  CHECK_THROWS(parse("3 1:1\n1 1:1\n"));
}

TEST_CASE("malformed input reports the line") {
  try {
    parse("1 1:1\n1 3:1 2:1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("1 0:1\n"), ParseError);
  CHECK_THROWS_AS(parse("1 1:abc\n"), ParseError);
  CHECK_THROWS_AS(parse("x 1:1\n"), ParseError);
}

TEST_CASE("sparse input is stored as CSR and dense input densely") {
  const Dataset sparse = parse("1 1:1 10:1\n-1 5:2\n1 7:1\n");
  CHECK(std::holds_alternative<CsrMatrix>(sparse.features));
  const Dataset dense = parse("1 1:1 2:1\n-1 1:2 2:3\n");
  CHECK(std::holds_alternative<DenseMatrix>(dense.features));
}

TEST_CASE("write then read round-trips") {
  const std::string text = "+1 1:0.25 2:-1.5\n-1 3:4\n+1 1:1e-7 4:3.141592653589793\n-1 2:2\n";
  const Dataset a = parse(text);
  std::ostringstream out;
  write_libsvm(out, a);
  const Dataset b = parse(out.str());
  CHECK(same_content(a, b));
  CHECK(to_dense(a.features) == to_dense(b.features));

  // Unused trailing column keeps the width.
  Dataset c;
  c.features = DenseMatrix::from_rows({{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}});
  c.labels = {1, -1};
  std::ostringstream out2;
  write_libsvm(out2, c);
  const Dataset c2 = parse(out2.str());
  CHECK(c2.num_features() == 3);
  CHECK(same_content(c, c2));

  const Dataset r = testsupport::random_dataset(30, 6, 4);
  std::ostringstream out3;
  write_libsvm(out3, r);
  CHECK(to_dense(parse(out3.str()).features) == to_dense(r.features));
}

TEST_CASE("synthetic generator shape and determinism") {
  const Dataset a = synth_gen(9000, 100, 100.0, 3);
  CHECK(a.num_examples() == 9000);
  CHECK(a.num_features() == 100);
  a.validate();
  const Dataset b = synth_gen(300, 10, 50.0, 9);
  CHECK(same_content(b, synth_gen(300, 10, 50.0, 9)));
  CHECK_FALSE(same_content(b, synth_gen(300, 10, 50.0, 10)));
}

TEST_CASE("kappa = 1 gives equal scales and a nearly isotropic Hessian at zero") {
  const Dataset ds = synth_gen(4000, 8, 1.0, 2);
  const DenseMatrix x = to_dense(ds.features);
  const Vector sv = sym_eigvals(gram(x));
  // Equal scales leave only Gaussian sampling spread: the Marchenko-Pastur edge
  // ratio ((1 + sqrt(d/n)) / (1 - sqrt(d/n)))^2 is about 1.2 here.
  CHECK(sv.back() / sv.front() < 1.35);
  const LogisticModel model(ds);
  const Vector w0(8, 0.0);
  const Vector ev = sym_eigvals(model.full_hessian(w0).dense());
  CHECK(ev.back() / ev.front() < 1.35);
}

TEST_CASE("ill-conditioned synthetic instance hits the condition-number band") {
  const double kappa = 1e4;
  const Dataset ds = synth_gen(2000, 50, kappa, 1);
  const LogisticModel model(ds);
  const ReferenceSolution ref = run_reference_newton(model, Vector(50, 0.0));
  const Vector ev = sym_eigvals(model.full_hessian(ref.w_star).dense());
  const double cond = ev.back() / ev.front();
  MESSAGE("cond(Hessian at w*) = " << cond);
  CHECK(cond >= 0.1 * kappa);
  CHECK(cond <= 10.0 * kappa);
}

TEST_CASE("split sizes, determinism and coverage") {
  const Dataset ten = testsupport::random_dataset(10, 2, 1);
  const SplitDataset s10 = split(ten, 0.1, 5);
  CHECK(s10.train.num_examples() == 9);
  CHECK(s10.test.num_examples() == 1);

  const Dataset big = testsupport::random_dataset(1000, 3, 2);
  const SplitDataset a = split(big, 0.1, 7);
  const SplitDataset b = split(big, 0.1, 7);
  CHECK(a.train.num_examples() == 900);
  CHECK(a.test.num_examples() == 100);
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.test_rows == b.test_rows);
  std::set<std::size_t> all(a.train_rows.begin(), a.train_rows.end());
  all.insert(a.test_rows.begin(), a.test_rows.end());
  CHECK(all.size() == 1000);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 999);
  CHECK(same_content(a.test, select_rows(big, a.test_rows)));
  CHECK(split(big, 0.1, 8).test_rows != a.test_rows);
}
