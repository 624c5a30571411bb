#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dirms/bandwidth.hpp"
#include "dirms/sampling.hpp"
#include "dirms/sphere.hpp"
#include "test_util.hpp"

using namespace dirms;
using sampling::SeededRng;
using sphere::Matrix;
using sphere::UnitVector;
using sphere::Vector;
using testutil::basis;
using testutil::rel_err;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Circular test-mixture density at pinned angles, 40-digit reference.
constexpr double kF1At0 = 0.262475008901168610413;
constexpr double kF1AtHalfPi = 0.531808435291561322356;
constexpr double kF1AtMinusPi = 0.0124750089011686104134;
}  // namespace

TEST_CASE("generator is deterministic and named") {
  SeededRng a(42), b(42), c(43);
  CHECK(SeededRng::algorithm() == "xoshiro256++");
  CHECK(a.seed() == 42);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
    all_equal = all_equal && (va == vb);
    any_diff = any_diff || (va != vc);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform doubles stay in range and fill the interval") {
  SeededRng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    double v = rng.uniform_open0();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}

TEST_CASE("normal deviates have sane moments") {
  SeededRng rng(11);
  double sum = 0.0, sumsq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("jump produces a stream independent of the original") {
  SeededRng a(5), b(5);
  b.jump();
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    if (a.next_u64() == b.next_u64()) ++equal;
  }
  CHECK(equal == 0);
  // Jumping is itself deterministic.
  SeededRng c(5);
  c.jump();
  SeededRng d(5);
  d.jump();
  CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("uniform sphere samples: shape, norms, centering") {
  SeededRng rng(13);
  CHECK(sampling::sample_uniform_sphere(2, 0, rng).rows() == 0);
  Matrix big = sampling::sample_uniform_sphere(2, 100000, rng);
  REQUIRE(big.cols() == 3);
  for (Eigen::Index i = 0; i < big.rows(); ++i) {
    CHECK(std::abs(big.row(i).norm() - 1.0) <= 1e-12);
  }
  CHECK(big.colwise().mean().norm() < 0.02);
}

TEST_CASE("samplers reproduce bit-identical streams per seed") {
  SeededRng r1(99), r2(99);
  Matrix a = sampling::sample_uniform_sphere(3, 50, r1);
  Matrix b = sampling::sample_uniform_sphere(3, 50, r2);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

  SeededRng r3(99), r4(99);
  UnitVector mu{basis(3, 0)};
  Matrix c = sampling::sample_vmf(mu, 5.0, 50, r3);
  Matrix d = sampling::sample_vmf(mu, 5.0, 50, r4);
  CHECK((c - d).cwiseAbs().maxCoeff() == 0.0);

  SeededRng r5(99), r6(99);
  std::vector<double> e = sampling::sample_circular_f1(200, r5);
  std::vector<double> f = sampling::sample_circular_f1(200, r6);
  CHECK(e == f);
}

TEST_CASE("vMF sampler: zero concentration looks uniform") {
  SeededRng rng(17);
  Matrix sample = sampling::sample_vmf(UnitVector{basis(3, 0)}, 0.0, 100000, rng);
  CHECK(bandwidth::mean_resultant_length(sample) < 0.02);
}

TEST_CASE("vMF sampler: resultant length and mean direction at nu = 5") {
  SeededRng rng(19);
  UnitVector mu = sphere::normalize(basis(3, 0) + 0.5 * basis(3, 2));
  Matrix sample = sampling::sample_vmf(mu, 5.0, 100000, rng);
  // Closed form for the 2-sphere: coth(5) - 1/5.
  CHECK(std::abs(bandwidth::mean_resultant_length(sample) - 0.800090803982019375537) <= 0.005);
  UnitVector mean_dir = sphere::normalize(sample.colwise().mean().transpose());
  CHECK(sphere::geodesic_distance(mean_dir, mu) < 0.02);
  for (Eigen::Index i = 0; i < 100; ++i) {
    CHECK(std::abs(sample.row(i * 997).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("concentration recovered from a large vMF sample") {
  SeededRng rng(23);
  Matrix sample = sampling::sample_vmf(UnitVector{basis(3, 1)}, 5.0, 100000, rng);
  double nu_hat = bandwidth::concentration_estimate(bandwidth::mean_resultant_length(sample), 2);
  // The closed-form estimator is approximate: fed the exact population
  // resultant length coth(5) - 1/5 it returns 5.24683..., not 5. The sampler
  // is judged against that population value of the estimator itself.
  CHECK(std::abs(nu_hat - 5.24683440362213314839) <= 0.1);
}

TEST_CASE("vMF sampler refuses hopeless concentrations") {
  SeededRng rng(29);
  CHECK_THROWS_AS(sampling::sample_vmf(UnitVector{basis(3, 0)}, 1e8, 1, rng),
                  sampling::RejectionBudgetExceeded);
}

TEST_CASE("mixture spec validation") {
  UnitVector e1{basis(3, 0)}, e2{basis(3, 1)};
  sampling::MixtureSpec ok{{{e1, 2.0, 0.5}, {e2, 3.0, 0.5}}, 2};
  CHECK_NOTHROW(ok.validate());

  sampling::MixtureSpec bad_weights{{{e1, 2.0, 0.6}, {e2, 3.0, 0.5}}, 2};
  CHECK_THROWS_AS(bad_weights.validate(), std::invalid_argument);

  sampling::MixtureSpec negative{{{e1, 2.0, 1.5}, {e2, 3.0, -0.5}}, 2};
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

  UnitVector e1_4d{basis(4, 0)};
  sampling::MixtureSpec wrong_dim{{{e1, 2.0, 0.5}, {e1_4d, 3.0, 0.5}}, 2};
  CHECK_THROWS_AS(wrong_dim.validate(), std::invalid_argument);

  sampling::MixtureSpec empty{{}, 2};
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("single-component mixture labels everything zero") {
  SeededRng rng(31);
  sampling::MixtureSpec spec{{{UnitVector{basis(3, 0)}, 4.0, 1.0}}, 2};
  sampling::LabeledSample s = sampling::sample_mixture(spec, 200, rng);
  REQUIRE(s.labels.size() == 200);
  CHECK(std::all_of(s.labels.begin(), s.labels.end(), [](int l) { return l == 0; }));
  CHECK(s.points.rows() == 200);
}

TEST_CASE("three-component mixture: label frequencies within multinomial bounds") {
  // Weights 0.3 / 0.3 / 0.4 at n = 1000; each count must fall within three
  // standard deviations of its expectation.
  SeededRng rng(37);
  sampling::MixtureSpec spec{{{sphere::lonlat_to_unit(-120, -45), 8.0, 0.3},
                              {sphere::lonlat_to_unit(0, 60), 8.0, 0.3},
                              {sphere::lonlat_to_unit(150, 0), 5.0, 0.4}},
                             2};
  const Eigen::Index n = 1000;
  sampling::LabeledSample s = sampling::sample_mixture(spec, n, rng);
  std::vector<int> counts(3, 0);
  for (int l : s.labels) {
    REQUIRE(l >= 0);
    REQUIRE(l < 3);
    ++counts[static_cast<std::size_t>(l)];
  }
  const double weights[3] = {0.3, 0.3, 0.4};
  for (int j = 0; j < 3; ++j) {
    double expectation = weights[j] * static_cast<double>(n);
    double sd = std::sqrt(static_cast<double>(n) * weights[j] * (1 - weights[j]));
    INFO("component ", j, " count ", counts[static_cast<std::size_t>(j)]);
    CHECK(std::abs(counts[static_cast<std::size_t>(j)] - expectation) <= 3 * sd);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(std::abs(s.points.row(i).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("four-component equal-weight mixture on a higher-dimensional sphere") {
  SeededRng rng(41);
  int q = 4;
  std::vector<sampling::MixtureComponent> comps;
  for (int j = 0; j < 4; ++j) comps.push_back({UnitVector{basis(q + 1, j)}, 10.0, 0.25});
  sampling::MixtureSpec spec{comps, q};
  sampling::LabeledSample s = sampling::sample_mixture(spec, 400, rng);
  std::vector<int> counts(4, 0);
  for (int l : s.labels) ++counts[static_cast<std::size_t>(l)];
  for (int j = 0; j < 4; ++j) {
    CHECK(counts[static_cast<std::size_t>(j)] > 50);  // 100 expected, 3 sigma ~ 26
  }
}

TEST_CASE("circular mixture: range, determinism of the labeled variant") {
  SeededRng r1(43), r2(43);
  sampling::LabeledAngles labeled = sampling::sample_circular_f1_labeled(5000, r1);
  std::vector<double> plain = sampling::sample_circular_f1(5000, r2);
  CHECK(labeled.angles == plain);
  int laplace = 0;
  for (std::size_t i = 0; i < labeled.angles.size(); ++i) {
    CHECK(labeled.angles[i] >= -kPi);
    CHECK(labeled.angles[i] < kPi);
    REQUIRE((labeled.labels[i] == 0 || labeled.labels[i] == 1));
    if (labeled.labels[i] == 0) ++laplace;
  }
  // Fair coin between the two components: 3 sigma of n=5000 is ~106.
  CHECK(std::abs(laplace - 2500) <= 110);
}

TEST_CASE("circular mixture matches its analytic density") {
  SeededRng rng(47);
  const Eigen::Index n = 100000;
  std::vector<double> angles = sampling::sample_circular_f1(n, rng);
  const int bins = 50;
  std::vector<double> freq(bins, 0.0);
  for (double a : angles) {
    int b = static_cast<int>((a + kPi) / (2 * kPi) * bins);
    b = std::clamp(b, 0, bins - 1);
    freq[static_cast<std::size_t>(b)] += 1.0;
  }
  double width = 2 * kPi / bins;
  double max_dev = 0.0;
  for (int b = 0; b < bins; ++b) {
    double center = -kPi + (b + 0.5) * width;
    double empirical = freq[static_cast<std::size_t>(b)] / (static_cast<double>(n) * width);
    max_dev = std::max(max_dev, std::abs(empirical - sampling::circular_f1_density(center)));
  }
  CHECK(max_dev < 0.02);
}

TEST_CASE("circular mixture has local maxima at both component centers") {
  SeededRng rng(53);
  const Eigen::Index n = 100000;
  std::vector<double> angles = sampling::sample_circular_f1(n, rng);
  const int bins = 36;  // 10-degree bins
  std::vector<int> freq(bins, 0);
  for (double a : angles) {
    int b = static_cast<int>((a + kPi) / (2 * kPi) * bins);
    freq[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1;
  }
  auto bin_of = [&](double angle) {
    return static_cast<int>((angle + kPi) / (2 * kPi) * bins);
  };
  int b0 = bin_of(0.0), b1 = bin_of(kPi / 2);
  auto wrap = [&](int b) { return (b + bins) % bins; };
  // Each center's bin beats its non-adjacent surroundings two bins out.
  CHECK(freq[wrap(b0)] > freq[wrap(b0 - 2)]);
  CHECK(freq[wrap(b0)] + freq[wrap(b0 + 1)] > freq[wrap(b0 + 2)] + freq[wrap(b0 + 3)]);
  CHECK(freq[wrap(b1)] + freq[wrap(b1 + 1)] > freq[wrap(b1 + 3)] + freq[wrap(b1 + 4)]);
  CHECK(freq[wrap(b1)] + freq[wrap(b1 + 1)] > freq[wrap(b1 - 3)] + freq[wrap(b1 - 2)]);
}

TEST_CASE("analytic circular density: pinned values and unit mass") {
  CHECK(rel_err(sampling::circular_f1_density(0.0), kF1At0) <= 1e-12);
  CHECK(rel_err(sampling::circular_f1_density(kPi / 2), kF1AtHalfPi) <= 1e-12);
  CHECK(rel_err(sampling::circular_f1_density(-kPi), kF1AtMinusPi) <= 1e-12);
  // Trapezoid over [-pi, pi]: the density is continuous and periodic here.
  const int m = 20000;
  double mass = 0.0;
  for (int k = 0; k < m; ++k) {
    mass += sampling::circular_f1_density(-kPi + 2 * kPi * k / m);
  }
  mass *= 2 * kPi / m;
  CHECK(std::abs(mass - 1.0) <= 1e-6);
}

TEST_CASE("angle embedding lands on the unit circle") {
  std::vector<double> angles = {0.0, kPi / 2, -kPi / 2, 2.5};
  Matrix embedded = sampling::embed_angles(angles);
  REQUIRE(embedded.rows() == 4);
  REQUIRE(embedded.cols() == 2);
  CHECK((embedded.row(0).transpose() - basis(2, 0)).norm() <= 1e-15);
  CHECK((embedded.row(1).transpose() - basis(2, 1)).norm() <= 1e-15);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(std::abs(embedded.row(i).norm() - 1.0) <= 1e-15);
  }
  CHECK(embedded(3, 0) == doctest::Approx(std::cos(2.5)).epsilon(1e-15));
  CHECK(embedded(3, 1) == doctest::Approx(std::sin(2.5)).epsilon(1e-15));
}
