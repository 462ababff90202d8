#include "qkdsim/linear_optics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "qkdsim/errors.hpp"

namespace qkdsim {
namespace {

using Complex = std::complex<double>;

double factorial(unsigned n) {
  double f = 1.0;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_shape(const ModeTransform& t) {
  if (t.matrix.rows() != static_cast<Eigen::Index>(t.outputs.size()) ||
      t.matrix.cols() != static_cast<Eigen::Index>(t.inputs.size())) {
    throw UsageError("mode transform matrix does not match its mode lists");
  }
  auto unique = [](std::vector<ModeId> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  if (!unique(t.inputs) || !unique(t.outputs)) {
    throw UsageError("mode transform lists must not repeat a mode");
  }
}

}  // namespace

ModeTransform ModeTransform::inverse() const {
  return {outputs, inputs, matrix.adjoint()};
}

bool ModeTransform::is_unitary(double tol) const {
  if (matrix.rows() != matrix.cols()) return false;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(matrix.rows(), matrix.cols());
  return (matrix.adjoint() * matrix - id).cwiseAbs().maxCoeff() <= tol;
}

std::vector<ModeTransform> then(std::vector<ModeTransform> first,
                                const std::vector<ModeTransform>& second) {
  first.insert(first.end(), second.begin(), second.end());
  return first;
}

PureState apply(const PureState& state, const ModeTransform& t, unsigned max_photons) {
  check_shape(t);
  std::vector<ModeId> sorted_inputs = t.inputs;
  std::sort(sorted_inputs.begin(), sorted_inputs.end());

  std::vector<ModeId> modes;
  for (ModeId m : state.modes()) {
    if (!std::binary_search(sorted_inputs.begin(), sorted_inputs.end(), m)) modes.push_back(m);
  }
  for (ModeId m : t.outputs) {
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
  }

  const std::size_t n_out = t.outputs.size();
  PureState::Terms result;
  for (const auto& [occ, amp] : state.terms()) {
    if (occ.total() > max_photons) {
      throw RegimeError(fmt::format("state holds {} photons, above the exact-regime bound {}; "
                                    "use MacroPulse",
                                    occ.total(), max_photons));
    }
    const OccupationVector rest = occ.without(sorted_inputs);
    for (ModeId m : t.outputs) {
      if (rest.count(m) != 0) {
        throw UsageError(fmt::format("output mode {} is already occupied", to_string(m)));
      }
    }

    // Expand prod_j (sum_k U(k,j) a_k^dag)^{n_j} as a polynomial in output
    // creation operators, one photon at a time.
    std::map<std::vector<unsigned>, Complex> poly{{std::vector<unsigned>(n_out, 0U), 1.0}};
    double input_norm = 1.0;
    for (std::size_t j = 0; j < t.inputs.size(); ++j) {
      const unsigned n = occ.count(t.inputs[j]);
      input_norm *= factorial(n);
      for (unsigned photon = 0; photon < n; ++photon) {
        std::map<std::vector<unsigned>, Complex> next;
        for (const auto& [mono, coeff] : poly) {
          for (std::size_t k = 0; k < n_out; ++k) {
            const Complex u = t.matrix(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
            if (u == Complex{}) continue;
            std::vector<unsigned> grown = mono;
            ++grown[k];
            next[std::move(grown)] += coeff * u;
          }
        }
        poly = std::move(next);
      }
    }

    const Complex scale = amp / std::sqrt(input_norm);
    for (const auto& [mono, coeff] : poly) {
      OccupationVector out = rest;
      double out_norm = 1.0;
      for (std::size_t k = 0; k < n_out; ++k) {
        out.set(t.outputs[k], mono[k]);
        out_norm *= factorial(mono[k]);
      }
      result[out] += scale * coeff * std::sqrt(out_norm);
    }
  }
  return PureState(std::move(modes), std::move(result));
}

PureState apply(const PureState& state, const std::vector<ModeTransform>& chain,
                unsigned max_photons) {
  PureState s = state;
  for (const ModeTransform& t : chain) s = apply(s, t, max_photons);
  return s;
}

MacroPulse apply(const MacroPulse& pulse, const ModeTransform& t) {
  check_shape(t);
  std::map<ModeId, MacroPulse::Field> fields = pulse.fields();
  Eigen::VectorXcd in(static_cast<Eigen::Index>(t.inputs.size()));
  for (std::size_t j = 0; j < t.inputs.size(); ++j) {
    auto it = fields.find(t.inputs[j]);
    in(static_cast<Eigen::Index>(j)) = it == fields.end() ? Complex{} : it->second;
    if (it != fields.end()) fields.erase(it);
  }
  for (ModeId m : t.outputs) {
    auto it = fields.find(m);
    if (it != fields.end() && std::norm(it->second) > 0.0) {
      throw UsageError(fmt::format("output mode {} is already illuminated", to_string(m)));
    }
  }
  const Eigen::VectorXcd out = t.matrix * in;
  for (std::size_t k = 0; k < t.outputs.size(); ++k) {
    fields[t.outputs[k]] = out(static_cast<Eigen::Index>(k));
  }
  return MacroPulse(std::move(fields), pulse.background());
}

MacroPulse apply(const MacroPulse& pulse, const std::vector<ModeTransform>& chain) {
  MacroPulse p = pulse;
  for (const ModeTransform& t : chain) p = apply(p, t);
  return p;
}

ModeTransform beam_splitter(std::pair<ModeId, ModeId> in_pair, std::pair<ModeId, ModeId> out_pair,
                            double transmittance) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    throw UsageError("beam splitter transmittance must lie in [0,1]");
  }
  const double t = std::sqrt(transmittance);
  const Complex r{0.0, std::sqrt(1.0 - transmittance)};
  Eigen::MatrixXcd m(2, 2);
  m << t, r, r, t;
  return {{in_pair.first, in_pair.second}, {out_pair.first, out_pair.second}, m};
}

ModeTransform polarization_rotation(PulseId pulse, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::MatrixXcd m(2, 2);
  m << c, s, -s, c;
  const ModeId h = pulse.mode(Polarization::H);
  const ModeId v = pulse.mode(Polarization::V);
  return {{h, v}, {h, v}, m};
}

PureState apply_beam_splitter(const PureState& state, std::pair<ModeId, ModeId> in_pair,
                              std::pair<ModeId, ModeId> out_pair, double transmittance,
                              unsigned max_photons) {
  return apply(state, beam_splitter(in_pair, out_pair, transmittance), max_photons);
}

PureState apply_polarization_rotation(const PureState& state, PulseId pulse, double angle,
                                      unsigned max_photons) {
  return apply(state, polarization_rotation(pulse, angle), max_photons);
}

PureState split_one_photon(const PureState& state, PulseId from, PulseId to) {
  std::vector<ModeId> modes = state.modes();
  for (Polarization p : kPolarizations) {
    if (!state.has_mode(to.mode(p))) modes.push_back(to.mode(p));
  }
  PureState::Terms out;
  for (const auto& [occ, amp] : state.terms()) {
    for (Polarization p : kPolarizations) {
      const unsigned n = occ.count(from.mode(p));
      if (n == 0) continue;
      if (occ.count(to.mode(p)) != 0) throw UsageError("split target modes must be empty");
      OccupationVector moved = occ;
      moved.set(from.mode(p), n - 1);
      moved.set(to.mode(p), 1);
      // a_from |n> = sqrt(n) |n-1>, a_to^dag |0> = |1>.
      out[moved] += amp * std::sqrt(static_cast<double>(n));
    }
  }
  PureState result(std::move(modes), std::move(out));
  if (result.terms().empty()) throw UsageError("no photon to split off");
  return result.normalized();
}

}  // namespace qkdsim
