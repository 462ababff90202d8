#pragma once

// Reference implementations that share no code with the library. They are
// slow and simple on purpose.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Counts = std::vector<unsigned>;

inline double factorial(unsigned n) {
  double f = 1.0;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

// Permanent by summing over all permutations.
inline Complex permanent(const Eigen::MatrixXcd& m) {
  const auto n = static_cast<int>(m.rows());
  if (n == 0) return 1.0;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Complex total = 0.0;
  do {
    Complex term = 1.0;
    for (int i = 0; i < n; ++i) term *= m(i, perm[i]);
    total += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

// Every occupation pattern of `modes` modes with `photons` photons in total.
inline std::vector<Counts> patterns(std::size_t modes, unsigned photons) {
  std::vector<Counts> out;
  Counts c(modes, 0);
  auto rec = [&](auto& self, std::size_t i, unsigned left) -> void {
    if (i + 1 == modes) {
      c[i] = left;
      out.push_back(c);
      return;
    }
    for (unsigned k = 0; k <= left; ++k) {
      c[i] = k;
      self(self, i + 1, left - k);
    }
  };
  if (modes == 0) return out;
  rec(rec, 0, photons);
  return out;
}

// <out| U |in> for creation operators transforming as a_j -> sum_k u(k, j) b_k:
// the permanent of u with row k repeated out[k] times and column j repeated
// in[j] times, over sqrt(prod in! prod out!).
inline Complex transition_amplitude(const Eigen::MatrixXcd& u, const Counts& in,
                                    const Counts& out) {
  std::vector<int> rows;
  std::vector<int> cols;
  for (std::size_t k = 0; k < out.size(); ++k) rows.insert(rows.end(), out[k], static_cast<int>(k));
  for (std::size_t j = 0; j < in.size(); ++j) cols.insert(cols.end(), in[j], static_cast<int>(j));
  if (rows.size() != cols.size()) return 0.0;
  Eigen::MatrixXcd sub(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) sub(r, c) = u(rows[r], cols[c]);
  }
  double norm = 1.0;
  for (unsigned n : in) norm *= factorial(n);
  for (unsigned n : out) norm *= factorial(n);
  return permanent(sub) / std::sqrt(norm);
}

// Dense Haar-ish random unitary via QR of a complex Gaussian matrix.
inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(gen), g(gen));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  return qr.householderQ();
}

// Born rule by projectors on a dense vector: the state is given as
// amplitudes over full patterns; returns P(pattern restricted to `measured`).
inline std::map<Counts, double> marginal(const std::vector<Counts>& basis,
                                         const Eigen::VectorXcd& psi,
                                         const std::vector<std::size_t>& measured) {
  std::map<Counts, Eigen::VectorXd> projectors;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    Counts key;
    for (std::size_t m : measured) key.push_back(basis[i][m]);
    auto [it, fresh] = projectors.try_emplace(key, Eigen::VectorXd::Zero(basis.size()));
    it->second(static_cast<Eigen::Index>(i)) = 1.0;
  }
  std::map<Counts, double> out;
  for (const auto& [key, diag] : projectors) {
    const Eigen::VectorXcd projected = diag.cast<Complex>().cwiseProduct(psi);
    out[key] = psi.dot(projected).real();
  }
  return out;
}

// ---------------------------------------------------------------------------
// BB84 with single photons, by exhaustive case enumeration.
// ---------------------------------------------------------------------------

// Polarization qubit as a real 2-vector (H, V): bit 0 of the computational
// basis is H, bit 1 is V; the Hadamard basis uses the diagonals.
inline std::array<double, 2> qubit(int basis, int bit) {
  const double s = 1.0 / std::sqrt(2.0);
  if (basis == 0) return bit == 0 ? std::array{1.0, 0.0} : std::array{0.0, 1.0};
  return bit == 0 ? std::array{s, s} : std::array{s, -s};
}

inline double prob(int basis, int bit, const std::array<double, 2>& state) {
  const auto q = qubit(basis, bit);
  const double a = q[0] * state[0] + q[1] * state[1];
  return a * a;
}

struct InterceptResendOracle {
  double qber = 0.0;      // over sifted rounds
  double eve_info = 0.0;  // P(Eve's claim == Bob's bit) over sifted rounds
};

// Alice state x 4, Eve basis x 2, Eve outcome x 2, Bob outcome x 2, with Bob
// in Alice's basis (the sifted rounds).
inline InterceptResendOracle intercept_resend() {
  InterceptResendOracle r;
  for (int a = 0; a < 2; ++a) {
    for (int x = 0; x < 2; ++x) {
      for (int e = 0; e < 2; ++e) {
        for (int y = 0; y < 2; ++y) {
          const double p_y = prob(e, y, qubit(a, x));
          for (int z = 0; z < 2; ++z) {
            const double p = 0.25 * 0.5 * p_y * prob(a, z, qubit(e, y));
            if (z != x) r.qber += p;
            if (y == z) r.eve_info += p;
          }
        }
      }
    }
  }
  return r;
}

}  // namespace oracle
