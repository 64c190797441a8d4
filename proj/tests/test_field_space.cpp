#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <numeric>
#include <random>

#include "fieldclick/field_space.hpp"

using namespace fieldclick;

namespace {

GridPtr line_grid(std::size_t cells, double cell_volume) {
  Grid::Coordinates pts(static_cast<Eigen::Index>(cells), 1);
  for (std::size_t i = 0; i < cells; ++i) pts(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
  return std::make_shared<const Grid>(pts, cell_volume);
}

FieldState field(const GridPtr& grid, std::initializer_list<Complex> values) {
  FieldState::Amplitudes a(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const auto& v : values) a(i++) = v;
  return FieldState(grid, a);
}

FieldState random_field(const GridPtr& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  FieldState::Amplitudes a(static_cast<Eigen::Index>(grid->size()));
  for (auto& z : a) z = Complex(normal(rng), normal(rng));
  return FieldState(grid, a);
}

GridPtr random_grid(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> cells(1, 6);
  std::uniform_int_distribution<int> dims(1, 3);
  const int dim = dims(rng);
  std::vector<double> lower(static_cast<std::size_t>(dim), -1.0);
  std::vector<double> upper(static_cast<std::size_t>(dim), 2.0);
  std::vector<std::size_t> n;
  for (int a = 0; a < dim; ++a) n.push_back(cells(rng));
  return Grid::uniform(std::span<const double>(lower), std::span<const double>(upper),
                       std::span<const std::size_t>(n));
}

}  // namespace

TEST_CASE("uniform grid orders cells lexicographically") {
  const std::array<double, 2> lower{0.0, 0.0};
  const std::array<double, 2> upper{2.0, 1.0};
  const std::array<std::size_t, 2> cells{2, 4};
  const auto grid = Grid::uniform(std::span<const double>(lower), std::span<const double>(upper),
                                  std::span<const std::size_t>(cells));
  CHECK(grid->dim() == 2);
  CHECK(grid->size() == 8);
  CHECK(grid->cell_volume() == doctest::Approx(0.25));
  CHECK(grid->point(0)(0) == doctest::Approx(0.5));
  CHECK(grid->point(0)(1) == doctest::Approx(0.125));
  CHECK(grid->point(5)(0) == doctest::Approx(1.5));
  CHECK(grid->point(5)(1) == doctest::Approx(0.375));
}

TEST_CASE("grid rejects bad construction") {
  Grid::Coordinates unordered(2, 1);
  unordered << 1.0, 0.0;
  CHECK_THROWS_AS(Grid(unordered, 1.0), Error);
  Grid::Coordinates dup(2, 1);
  dup << 0.0, 0.0;
  CHECK_THROWS_AS(Grid(dup, 1.0), Error);
  Grid::Coordinates ok(2, 1);
  ok << 0.0, 1.0;
  CHECK_THROWS_AS(Grid(ok, 0.0), Error);
  CHECK_THROWS_AS(Grid(Grid::Coordinates(2, 4), 1.0), Error);
  CHECK_THROWS_AS(FieldState(line_grid(2, 1.0), FieldState::Amplitudes::Zero(3)), Error);
}

TEST_CASE("normalize") {
  const auto g2 = line_grid(2, 1.0);
  SUBCASE("already normalized") {
    const auto w = normalize(field(g2, {1.0, 0.0}));
    CHECK(w.amplitudes()(0) == Complex(1.0, 0.0));
    CHECK(w.amplitudes()(1) == Complex(0.0, 0.0));
  }
  SUBCASE("scaled by one half") {
    const auto w = normalize(field(g2, {2.0, 0.0}));
    CHECK(w.amplitudes()(0) == Complex(1.0, 0.0));
  }
  SUBCASE("cell volume enters the norm") {
    const auto w = normalize(field(line_grid(4, 0.25), {1.0, 1.0, 1.0, 1.0}));
    for (const auto& z : w.amplitudes()) CHECK(std::abs(z - Complex(1.0, 0.0)) < 1e-15);
  }
  SUBCASE("zero norm") {
    CHECK_THROWS_WITH_AS(normalize(field(g2, {0.0, 0.0})), "degenerate field state", Error);
  }
}

TEST_CASE("norm_squared") {
  CHECK(norm_squared(field(line_grid(2, 1.0), {0.0, 0.0})) == 0.0);
  CHECK(norm_squared(field(line_grid(2, 1.0), {1.0, 2.0})) == 5.0);
  CHECK(norm_squared(field(line_grid(1, 0.1), {Complex(3.0, 4.0)})) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("norm_squared stays accurate on a large grid") {
  // 1e6 cells of 0.1: naive left-to-right summation drifts visibly at 1e-12.
  const std::size_t n = 1'000'000;
  const auto grid = line_grid(n, 1.0);
  const FieldState psi(grid, FieldState::Amplitudes::Constant(static_cast<Eigen::Index>(n),
                                                              std::sqrt(0.1)));
  const double exact = static_cast<double>(n) * std::norm(Complex(std::sqrt(0.1)));
  CHECK(std::abs(norm_squared(psi) - exact) <= 1e-12 * exact);
}

TEST_CASE("born_probability") {
  const auto g2 = line_grid(2, 1.0);
  const std::array<std::size_t, 1> first{0};
  const std::array<std::size_t, 1> second{1};
  const std::array<std::size_t, 2> both{0, 1};
  CHECK(born_probability(normalize(field(g2, {1.0, 1.0})), first) == doctest::Approx(0.5));
  const auto w = normalize(field(g2, {1.0, 2.0}));
  CHECK(born_probability(w, first) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(born_probability(w, second) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(born_probability(w, both) == doctest::Approx(1.0).epsilon(1e-14));

  const std::array<std::size_t, 1> bad{2};
  const std::array<std::size_t, 2> dup{1, 1};
  CHECK_THROWS_AS(born_probability(w, bad), Error);
  CHECK_THROWS_AS(born_probability(w, dup), Error);
  CHECK_THROWS_AS(born_probability(w, std::span<const std::size_t>()), Error);
}

TEST_CASE("inner_product") {
  const double dv = 0.5;
  const auto g2 = line_grid(2, dv);
  const auto psi = field(g2, {Complex(1.0, 2.0), Complex(-0.5, 0.25)});
  CHECK(std::abs(inner_product(psi, psi) - Complex(norm_squared(psi), 0.0)) < 1e-15);

  const auto basis = delta_basis(g2);
  CHECK(std::abs(inner_product(basis[0], basis[1])) == 0.0);
  CHECK(std::abs(inner_product(basis[0], basis[0]) - 1.0) < 1e-15);

  // Sifting with the 1/dV delta reproduces pointwise evaluation.
  CHECK(inner_product(psi, discrete_delta(g2, 0)) == psi[0]);
  CHECK(inner_product(psi, discrete_delta(g2, 1)) == psi[1]);

  CHECK_THROWS_AS(inner_product(psi, field(line_grid(2, 1.0), {1.0, 1.0})), Error);
}

TEST_CASE("fourier basis on two cells is the Hadamard pair") {
  const double dv = 0.3;
  const auto basis = fourier_basis(line_grid(2, dv));
  const double h = 1.0 / std::sqrt(2.0 * dv);
  CHECK(basis[0][0] == Complex(h, 0.0));
  CHECK(basis[0][1] == Complex(h, 0.0));
  CHECK(basis[1][0] == Complex(h, 0.0));
  CHECK(basis[1][1] == Complex(-h, 0.0));
}

TEST_CASE("fourier and delta bases are orthonormal") {
  for (const std::size_t n : {1u, 2u, 3u, 5u, 8u}) {
    const auto grid = line_grid(n, 0.7);
    for (const auto& basis : {fourier_basis(grid), delta_basis(grid)}) {
      const auto gram = gram_matrix(std::span<const FieldState>(basis));
      const auto identity = Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
      CHECK((gram - identity).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("property: normalize, born partitions and invariances") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 200; ++trial) {
    const auto grid = random_grid(rng);
    const auto psi = random_field(grid, rng);
    const auto w = normalize(psi);

    CHECK(std::abs(norm_squared(w.as_field()) - 1.0) < 1e-12);

    const auto again = normalize(w.as_field());
    CHECK((again.amplitudes() - w.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);

    // Random partition of the grid into up to three regions.
    std::uniform_int_distribution<int> part(0, 2);
    std::array<std::vector<std::size_t>, 3> regions;
    for (std::size_t i = 0; i < grid->size(); ++i) regions[static_cast<std::size_t>(part(rng))].push_back(i);
    double total = 0;
    for (const auto& r : regions) {
      if (!r.empty()) total += born_probability(w, r);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);

    // Global phase and scale drop out.
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
    std::uniform_real_distribution<double> magnitude(1e-3, 1e3);
    const auto moved = normalize(scaled(psi, std::polar(magnitude(rng), angle(rng))));
    std::vector<std::size_t> first{0};
    CHECK(std::abs(born_probability(moved, first) - born_probability(w, first)) < 1e-12);

    // Conjugate symmetry and sifting.
    const auto other = random_field(grid, rng);
    CHECK(std::abs(inner_product(psi, other) - std::conj(inner_product(other, psi))) < 1e-12);
    const std::size_t cell = rng() % grid->size();
    CHECK(std::abs(inner_product(psi, discrete_delta(grid, cell)) - psi[cell]) <=
          1e-14 * std::abs(psi[cell]));
  }
}

TEST_CASE("single precision instantiation") {
  using GridF = BasicGrid<float>;
  GridF::Coordinates pts(2, 1);
  pts << 0.0f, 1.0f;
  const auto grid = std::make_shared<const GridF>(pts, 1.0f);
  BasicFieldState<float>::Amplitudes a(2);
  a << std::complex<float>(1.0f, 0.0f), std::complex<float>(2.0f, 0.0f);
  const BasicFieldState<float> psi(grid, a);
  CHECK(norm_squared(psi) == doctest::Approx(5.0f));
  const std::array<std::size_t, 1> first{0};
  CHECK(born_probability(normalize(psi), first) == doctest::Approx(0.2f));
}
