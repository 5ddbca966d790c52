#include "doctest.h"

#include "gss/linalg.hpp"
#include "gss/parallel.hpp"
#include "test_util.hpp"

using namespace gss;

TEST_CASE("hermitian helpers") {
  const ComplexMatrix a = test::random_complex(5, 5, 1);
  const ComplexMatrix h = linalg::hermitian_part(a);
  CHECK(linalg::hermitian_defect(h) < 1e-15);
  CHECK(linalg::hermitian_defect(a) > 0.1);
  CHECK(linalg::real_trace(h) == doctest::Approx(a.trace().real()));

  // float storage goes through the same templates
  const Eigen::MatrixXcf af = a.cast<std::complex<float>>();
  CHECK(linalg::hermitian_defect(linalg::hermitian_part(af)) < 1e-6f);
}

TEST_CASE("load_diagonal scales with the trace") {
  ComplexMatrix a = ComplexMatrix::Identity(4, 4) * 2.0;
  linalg::load_diagonal(a, 0.5);
  CHECK(a(0, 0).real() == doctest::Approx(3.0));
  ComplexMatrix z = ComplexMatrix::Zero(3, 3);
  linalg::load_diagonal(z, 1e-3);
  CHECK(z(1, 1).real() == doctest::Approx(1e-3));
}

TEST_CASE("loaded_llt") {
  SUBCASE("positive definite input factorizes with the requested loading") {
    const ComplexMatrix x = test::random_complex(4, 20, 2);
    const ComplexMatrix a = x * x.adjoint();
    const auto llt = linalg::loaded_llt(a, 0.0);
    const ComplexMatrix rebuilt = llt.matrixL() * llt.matrixL().toDenseMatrix().adjoint();
    CHECK((rebuilt - a).norm() < 1e-10 * a.norm());
    CHECK(linalg::log_det(llt) == doctest::Approx(std::log(a.determinant().real())));
  }
  SUBCASE("singular input is rescued by loading") {
    ComplexVector v = test::random_complex(4, 1, 3);
    const ComplexMatrix a = v * v.adjoint();
    CHECK_NOTHROW(linalg::loaded_llt(a, 1e-6));
  }
  SUBCASE("indefinite input fails after the retries") {
    ComplexMatrix a = ComplexMatrix::Identity(3, 3);
    a(2, 2) = -100.0;
    CHECK_THROWS_AS(linalg::loaded_llt(a, 1e-6), NumericalError);
  }
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
  const auto saved = thread_count();
  set_thread_count(3);
  std::vector<int> hits(101, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                    if (i == 7) throw Error("boom");
                  }),
                  Error);
  set_thread_count(saved);
}
