#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "skelfreq/error.hpp"
#include "skelfreq/log.hpp"
#include "skelfreq/transforms.hpp"

using namespace skelfreq;

namespace {

const GraphSpectrumBasis& ntu_basis() {
  static const auto b = graph_basis(SkeletonTopology::ntu25());
  return b;
}

double energy(const ComplexMatrix& m) {
  const double n = frobenius_norm(m);
  return n * n;
}

}  // namespace

TEST_CASE("DFT matches the naive oracle") {
  for (std::size_t T : {1u, 2u, 3u, 5u, 8u, 17u, 32u}) {
    CAPTURE(T);
    const auto x = oracle::random_matrix(3, T, 100 + T);
    const auto X = dft(x);
    for (std::size_t r = 0; r < 3; ++r) {
      std::vector<double> row(x.row(r).begin(), x.row(r).end());
      const auto ref = oracle::naive_dft(row);
      for (std::size_t l = 0; l < T; ++l) CHECK(std::abs(X(r, l) - ref[l]) < 1e-10);
    }
  }
}

TEST_CASE("DFT matrix entries and inverse") {
  const auto W = dft_matrix(6);
  CHECK(std::abs((*W)(1, 1) - std::polar(1.0, -2.0 * std::numbers::pi / 6.0)) < 1e-15);
  CHECK(dft_matrix(6) == W);  // cached
  const auto x = oracle::random_matrix(2, 6, 9);
  const auto back = idft(dft(x));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t t = 0; t < 6; ++t) CHECK(std::abs(back(r, t) - x(r, t)) < 1e-12);
}

TEST_CASE("GFT is orthonormal") {
  const auto x = oracle::random_matrix(25, 10, 4);
  const auto g = gft(x, ntu_basis());
  CHECK(std::abs(frobenius_norm(g) - frobenius_norm(x)) < 1e-12);
  CHECK(max_abs_difference(igft(g, ntu_basis()), x) < 1e-12);
}

TEST_CASE("JFT round trip and Parseval on random 25×64 signals") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = oracle::random_matrix(25, 64, 1000 + s, 2.0);
    const auto spec = jft(x, ntu_basis());
    CHECK(spec.basis_id == ntu_basis().id());
    const auto back = ijft(spec, ntu_basis());
    CHECK(frobenius_norm(back - x) < 1e-9);
    const double lhs = energy(spec.values);
    const double rhs = 64.0 * frobenius_norm(x) * frobenius_norm(x);
    CHECK(oracle::relative_error(lhs, rhs) < 1e-9);
  }
}

TEST_CASE("JFT equals UᵀXW computed by hand") {
  const auto x = oracle::random_matrix(25, 8, 77);
  const auto spec = jft(x, ntu_basis());
  const auto& U = ntu_basis().eigenvectors;
  for (std::size_t k = 0; k < 25; k += 6) {
    std::vector<double> row(8, 0.0);
    for (std::size_t t = 0; t < 8; ++t)
      for (std::size_t i = 0; i < 25; ++i) row[t] += U(i, k) * x(i, t);
    const auto ref = oracle::naive_dft(row);
    for (std::size_t l = 0; l < 8; ++l) CHECK(std::abs(spec.values(k, l) - ref[l]) < 1e-10);
  }
}

TEST_CASE("ijft refuses strongly non-Hermitian spectra and warns on small residue") {
  JointSpectrum s{ComplexMatrix(25, 8), ntu_basis().id()};
  s.values.set(0, 1, {1.0, 0.0});  // no conjugate partner
  try {
    (void)ijft(s, ntu_basis());
    FAIL("expected numeric-error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
  }

  const auto x = oracle::random_matrix(25, 8, 3);
  auto ok = jft(x, ntu_basis());
  ok.values.set(3, 2, ok.values(3, 2) + std::complex<double>(0.0, 1e-7));
  int warnings = 0;
  auto previous = set_warning_handler([&](const std::string&) { ++warnings; });
  (void)ijft(ok, ntu_basis());
  set_warning_handler(previous);
  CHECK(warnings == 1);
}

TEST_CASE("mask construction") {
  const auto sl = make_mask(MaskAxis::spatial, MaskKind::low, 2, 25);
  CHECK(sl.popcount() == 2);
  CHECK(sl.diagonal[24] == 1);
  CHECK(sl.diagonal[23] == 1);
  CHECK(sl.diagonal[0] == 0);
  CHECK(sl.describe() == "spatial-low-2");
  const auto sh = make_mask(MaskAxis::spatial, MaskKind::high, 5, 25);
  CHECK(sh.diagonal[0] == 1);
  CHECK(sh.diagonal[4] == 1);
  CHECK(sh.diagonal[5] == 0);

  CHECK(temporal_levels(64) == 33);
  CHECK(temporal_levels(7) == 4);
  const auto tl = make_mask(MaskAxis::temporal, MaskKind::low, 2, 64);
  // levels 0 and 1 → bins 0, 1, 63
  CHECK(tl.popcount() == 3);
  CHECK(tl.diagonal[63] == 1);
  const auto th = make_mask(MaskAxis::temporal, MaskKind::high, 1, 64);
  CHECK(th.popcount() == 1);
  CHECK(th.diagonal[32] == 1);
  const auto all = make_mask(MaskAxis::temporal, MaskKind::low, 33, 64);
  CHECK(all.popcount() == 64);

  CHECK_THROWS_AS(make_mask(MaskAxis::spatial, MaskKind::low, 0, 25), Error);
  CHECK_THROWS_AS(make_mask(MaskAxis::spatial, MaskKind::low, 26, 25), Error);
  CHECK_THROWS_AS(make_mask(MaskAxis::temporal, MaskKind::low, 34, 64), Error);
}

TEST_CASE("filtering is an idempotent projection onto the passband") {
  const auto x = oracle::random_matrix(25, 64, 5);
  for (auto kind : {MaskKind::low, MaskKind::high}) {
    for (std::size_t bw : {1u, 2u, 5u}) {
      const auto sm = make_mask(MaskAxis::spatial, kind, bw, 25);
      const auto tm = make_mask(MaskAxis::temporal, kind, bw, 64);
      for (int variant = 0; variant < 3; ++variant) {
        const std::optional<SpectralMask> s = variant != 1 ? std::optional(sm) : std::nullopt;
        const std::optional<SpectralMask> t = variant != 0 ? std::optional(tm) : std::nullopt;
        const auto once = apply_filter(x, ntu_basis(), s, t);
        const auto twice = apply_filter(once, ntu_basis(), s, t);
        CHECK(max_abs_difference(once, twice) < 1e-10);
        CHECK(out_of_band_energy_fraction(jft(once, ntu_basis()), s, t) < 1e-9);
        // complementary energy: passband + stopband = whole
        CHECK(frobenius_norm(once) <= frobenius_norm(x) + 1e-12);
      }
    }
  }
}

TEST_CASE("spectrum binary dump round trip and format errors") {
  const auto x = oracle::random_matrix(25, 16, 8);
  const auto spec = jft(x, ntu_basis()).values;
  std::stringstream ss;
  write_spectrum_binary(ss, spec);
  std::uint32_t flags = 0;
  const auto back = read_spectrum_binary(ss, &flags);
  CHECK(flags == spectrum_flag_complex);
  CHECK(std::ranges::equal(back.interleaved(), spec.interleaved()));

  std::stringstream ms;
  write_spectrum_binary(ms, spec.magnitude());
  const auto mag = read_spectrum_binary(ms, &flags);
  CHECK(flags == 0);
  CHECK(mag.real() == spec.magnitude());

  std::stringstream bad("XXXX0000000000000000");
  try {
    (void)read_spectrum_binary(bad);
    FAIL("expected format-error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
  }
  std::stringstream full;
  write_spectrum_binary(full, spec);
  std::stringstream truncated(full.str().substr(0, 40));
  CHECK_THROWS_AS(read_spectrum_binary(truncated), Error);
}

TEST_CASE("magnitude CSV keeps 17 significant digits") {
  Matrix m(1, 2);
  m(0, 0) = 0.1;
  m(0, 1) = 1.0 / 3.0;
  std::ostringstream os;
  write_magnitude_csv(os, m);
  std::istringstream is(os.str());
  double a = 0.0, b = 0.0;
  char comma = 0;
  is >> a >> comma >> b;
  CHECK(a == 0.1);
  CHECK(b == 1.0 / 3.0);
}
