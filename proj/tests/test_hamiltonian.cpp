#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "qpwegner/hamiltonian.hpp"
#include "qpwegner/rng.hpp"
#include "qpwegner/spectral.hpp"

using namespace qpwegner;

namespace {

std::map<LatticeVector, double> constant_potential(const std::vector<LatticeVector>& sites,
                                                   double value) {
  std::map<LatticeVector, double> v;
  for (const auto& s : sites) v[s] = value;
  return v;
}

std::map<LatticeVector, double> random_potential(const std::vector<LatticeVector>& sites,
                                                 SplitStream& stream) {
  std::map<LatticeVector, double> v;
  for (const auto& s : sites) v[s] = stream.next_unit();
  return v;
}

}  // namespace

TEST_CASE("shadow is the union of the one-particle boxes") {
  const TwoParticleCube same{{0}, {0}, 1};
  CHECK(shadow(same) == std::vector<LatticeVector>{{-1}, {0}, {1}});
  const TwoParticleCube apart{{0}, {10}, 1};
  CHECK(shadow(apart) == std::vector<LatticeVector>{{-1}, {0}, {1}, {9}, {10}, {11}});
  CHECK(shadow(apart).size() == 6);
  // invariant under particle exchange
  CHECK(shadow(apart) == shadow(exchanged(apart)));
}

TEST_CASE("exchange is an involution") {
  const CenterPair p{{0}, {5}};
  CHECK(exchange(p) == CenterPair{{5}, {0}});
  CHECK(exchange(exchange(p)) == p);
  const CenterPair fixed{{3}, {3}};
  CHECK(exchange(fixed) == fixed);
}

TEST_CASE("separation requirement") {
  CHECK(separation_ok({{0}, {0}}, {{100}, {100}}, 1));
  CHECK(!separation_ok({{0}, {0}}, {{0}, {0}}, 1));
  // the exchange image of (50, 0) coincides with (0, 50)
  CHECK(!separation_ok({{0}, {50}}, {{50}, {0}}, 10));
  CHECK(separation_ok({{0}, {0}}, {{9}, {9}}, 1));
  CHECK(!separation_ok({{0}, {0}}, {{8}, {8}}, 1));
}

TEST_CASE("separation supports the euclidean norm as well") {
  // (0,0) vs (7,7) in Z^2: max-norm distance 7, euclidean sqrt(98) > 8
  CHECK(!separation_ok({{0}, {0}}, {{7}, {7}}, 1, CenterNorm::max_norm));
  CHECK(separation_ok({{0}, {0}}, {{7}, {7}}, 1, CenterNorm::euclidean));
  CHECK(center_distance({{0}, {0}}, {{3}, {4}}, CenterNorm::euclidean) == 5.0);
  CHECK(center_distance({{0}, {0}}, {{3}, {4}}, CenterNorm::max_norm) == 4.0);
}

TEST_CASE("interaction is a symmetric range indicator") {
  const InteractionSpec u{2.5, 1};
  CHECK(u.value({0}, {1}) == 2.5);
  CHECK(u.value({1}, {0}) == 2.5);
  CHECK(u.value({0}, {2}) == 0.0);
  CHECK(u.value({0}, {0}) == 2.5);
  const InteractionSpec zero_range{1.0, 0};
  CHECK(zero_range.value({3}, {3}) == 1.0);
  CHECK(zero_range.value({3}, {4}) == 0.0);
}

TEST_CASE("radius-zero boxes have no hopping") {
  const TwoParticleCube cube{{2}, {7}, 0};
  std::map<LatticeVector, double> v{{{2}, 1.5}, {{7}, 0.25}};
  const InteractionSpec u{3.0, 10};
  const HamiltonianMatrix h = assemble_two_particle(cube, v, u);
  REQUIRE(h.dimension() == 1);
  CHECK(h.at(0, 0) == 1.5 + 0.25 + 3.0);
}

TEST_CASE("free two-particle matrix is the 3x3 grid") {
  const TwoParticleCube cube{{0}, {0}, 1};
  const InteractionSpec no_interaction{0.0, 0};
  const auto v = constant_potential(shadow(cube), 0.0);
  const HamiltonianMatrix h = assemble_two_particle(cube, v, no_interaction);
  REQUIRE(h.dimension() == 9);

  const double r2 = std::sqrt(2.0);
  const std::vector<double> expected = {-2.0 * r2, -r2, -r2, 0.0, 0.0, 0.0, r2, r2, 2.0 * r2};
  const Spectrum s = eigenvalues_symmetric(h);
  for (int k = 0; k < 9; ++k)
    CHECK(s.eigenvalues[static_cast<std::size_t>(k)] ==
          doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-7));

  // off-diagonal entries are hopping indicators
  for (int i = 0; i < 9; ++i) {
    double off = 0.0;
    for (int j = 0; j < 9; ++j) {
      if (i == j) continue;
      CHECK((h.at(i, j) == 0.0 || h.at(i, j) == 1.0));
      off += h.at(i, j);
    }
    CHECK(off <= 4.0);  // 4d with d = 1
  }
}

TEST_CASE("constant potential shifts the two-particle matrix by 2c") {
  const TwoParticleCube cube{{0}, {1}, 1};
  const InteractionSpec u{1.0, 1};
  const auto base = assemble_two_particle(cube, constant_potential(shadow(cube), 0.0), u);
  const double c = 0.73;
  const auto shifted = assemble_two_particle(cube, constant_potential(shadow(cube), c), u);
  for (int i = 0; i < base.dimension(); ++i)
    for (int j = 0; j < base.dimension(); ++j)
      CHECK(shifted.at(i, j) == doctest::Approx(base.at(i, j) + (i == j ? 2.0 * c : 0.0)));
}

TEST_CASE("one-particle assembly: path matrix and shifts") {
  const LatticeCube cube{{0}, 1};
  const auto h = assemble_one_particle(cube, constant_potential(cube.sites(), 0.0));
  REQUIRE(h.dimension() == 3);
  const Spectrum s = eigenvalues_symmetric(h);
  const double r2 = std::sqrt(2.0);
  CHECK(s.eigenvalues[0] == doctest::Approx(-r2).epsilon(1e-10));
  CHECK(s.eigenvalues[1] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(s.eigenvalues[2] == doctest::Approx(r2).epsilon(1e-10));

  const LatticeCube point{{4}, 0};
  const auto single = assemble_one_particle(point, {{{4}, 2.25}});
  REQUIRE(single.dimension() == 1);
  CHECK(single.at(0, 0) == 2.25);

  SplitStream stream(derive_key(61, {0}));
  const LatticeCube wide{{0}, 3};
  const auto v = random_potential(wide.sites(), stream);
  const Spectrum base = eigenvalues_symmetric(assemble_one_particle(wide, v));
  auto vshift = v;
  for (auto& [site, value] : vshift) value += 1.5;
  const Spectrum moved = eigenvalues_symmetric(assemble_one_particle(wide, vshift));
  for (int k = 0; k < base.dimension(); ++k)
    CHECK(std::abs(moved.eigenvalues[static_cast<std::size_t>(k)] -
                   base.eigenvalues[static_cast<std::size_t>(k)] - 1.5) < 1e-10);
}

TEST_CASE("missing potential values are rejected") {
  const LatticeCube cube{{0}, 1};
  std::map<LatticeVector, double> incomplete{{{0}, 1.0}, {{1}, 2.0}};
  CHECK_THROWS_AS(assemble_one_particle(cube, incomplete), std::invalid_argument);
  const TwoParticleCube tp{{0}, {0}, 1};
  CHECK_THROWS_AS(assemble_two_particle(tp, incomplete, InteractionSpec{}),
                  std::invalid_argument);
}

TEST_CASE("assembled matrices are bit-exactly symmetric") {
  const auto field = RandeletteField::make({}, ThetaSample::keyed(17), 1, 16);
  const ShiftAction action = ShiftAction::golden_mean_1d();
  SplitStream stream(derive_key(62, {0}));
  for (int trial = 0; trial < 20; ++trial) {
    const TwoParticleCube cube{{static_cast<int>(stream.next_u64() % 11) - 5},
                               {static_cast<int>(stream.next_u64() % 11) - 5},
                               1 + static_cast<int>(stream.next_u64() % 3)};
    const TorusPoint omega({stream.next_unit()});
    const auto h = assemble_two_particle(cube, field, action, omega, InteractionSpec{});
    for (int i = 0; i < h.dimension(); ++i)
      for (int j = 0; j < h.dimension(); ++j) CHECK(h.at(i, j) == h.at(j, i));
  }
}

TEST_CASE("spectra at exchanged centers coincide") {
  const auto field = RandeletteField::make({}, ThetaSample::keyed(23), 1, 16);
  const ShiftAction action = ShiftAction::golden_mean_1d();
  SplitStream stream(derive_key(63, {0}));
  for (int trial = 0; trial < 20; ++trial) {
    const TwoParticleCube cube{{static_cast<int>(stream.next_u64() % 21) - 10},
                               {static_cast<int>(stream.next_u64() % 21) - 10},
                               1 + static_cast<int>(stream.next_u64() % 3)};
    const TorusPoint omega({stream.next_unit()});
    const Spectrum a =
        eigenvalues_symmetric(assemble_two_particle(cube, field, action, omega, InteractionSpec{}));
    const Spectrum b = eigenvalues_symmetric(
        assemble_two_particle(exchanged(cube), field, action, omega, InteractionSpec{}));
    for (int k = 0; k < a.dimension(); ++k)
      CHECK(std::abs(a.eigenvalues[static_cast<std::size_t>(k)] -
                     b.eigenvalues[static_cast<std::size_t>(k)]) < 1e-9);
  }
}

TEST_CASE("weyl monotonicity under single-site bumps") {
  const TwoParticleCube cube{{0}, {1}, 1};
  SplitStream stream(derive_key(64, {0}));
  for (int trial = 0; trial < 25; ++trial) {
    auto v = random_potential(shadow(cube), stream);
    const Spectrum base = eigenvalues_symmetric(assemble_two_particle(cube, v, InteractionSpec{}));
    auto it = v.begin();
    std::advance(it, static_cast<long>(stream.next_u64() % v.size()));
    it->second += 0.1 + stream.next_unit();
    const Spectrum bumped =
        eigenvalues_symmetric(assemble_two_particle(cube, v, InteractionSpec{}));
    for (int k = 0; k < base.dimension(); ++k)
      CHECK(bumped.eigenvalues[static_cast<std::size_t>(k)] >=
            base.eigenvalues[static_cast<std::size_t>(k)] - 1e-12);
  }
}

TEST_CASE("raising every shadow value by t moves each eigenvalue by exactly 2t") {
  const TwoParticleCube cube{{0}, {2}, 1};
  SplitStream stream(derive_key(65, {0}));
  for (double t : {0.1, 1.0, 3.7}) {
    auto v = random_potential(shadow(cube), stream);
    const Spectrum base = eigenvalues_symmetric(assemble_two_particle(cube, v, InteractionSpec{}));
    auto lifted = v;
    for (auto& [site, value] : lifted) value += t;
    const Spectrum moved =
        eigenvalues_symmetric(assemble_two_particle(cube, lifted, InteractionSpec{}));
    for (int k = 0; k < base.dimension(); ++k)
      CHECK(std::abs(moved.eigenvalues[static_cast<std::size_t>(k)] -
                     base.eigenvalues[static_cast<std::size_t>(k)] - 2.0 * t) < 1e-9);
  }
}

TEST_CASE("two-dimensional assembly has the right connectivity") {
  const LatticeCube cube{{0, 0}, 1};
  const auto h = assemble_one_particle(cube, constant_potential(cube.sites(), 0.0));
  REQUIRE(h.dimension() == 9);
  // center site (0,0) has 4 neighbors, corners have 2
  int center = -1;
  const auto sites = cube.sites();
  for (std::size_t i = 0; i < sites.size(); ++i)
    if (sites[i] == LatticeVector{0, 0}) center = static_cast<int>(i);
  REQUIRE(center >= 0);
  double row = 0.0;
  for (int j = 0; j < 9; ++j) row += h.at(center, j);
  CHECK(row == 4.0);
}
