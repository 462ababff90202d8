#include "qkdsim/pure_state.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qkdsim/errors.hpp"

namespace qkdsim {
namespace {

bool contains_sorted(std::span<const ModeId> modes, ModeId m) {
  return std::binary_search(modes.begin(), modes.end(), m);
}

std::vector<ModeId> sorted_unique(std::span<const ModeId> modes) {
  std::vector<ModeId> out(modes.begin(), modes.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double factorial(unsigned n) {
  double f = 1.0;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

OccupationVector::OccupationVector(std::initializer_list<Entry> entries) {
  for (const auto& [mode, count] : entries) set(mode, count);
}

unsigned OccupationVector::count(ModeId mode) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), mode,
                             [](const Entry& e, ModeId m) { return e.first < m; });
  return (it != entries_.end() && it->first == mode) ? it->second : 0U;
}

void OccupationVector::set(ModeId mode, unsigned count) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), mode,
                             [](const Entry& e, ModeId m) { return e.first < m; });
  if (it != entries_.end() && it->first == mode) {
    if (count == 0) {
      entries_.erase(it);
    } else {
      it->second = count;
    }
  } else if (count != 0) {
    entries_.insert(it, {mode, count});
  }
}

unsigned OccupationVector::total() const {
  unsigned n = 0;
  for (const auto& e : entries_) n += e.second;
  return n;
}

OccupationVector OccupationVector::restricted_to(std::span<const ModeId> modes) const {
  OccupationVector out;
  for (const auto& e : entries_) {
    if (contains_sorted(modes, e.first)) out.entries_.push_back(e);
  }
  return out;
}

OccupationVector OccupationVector::without(std::span<const ModeId> modes) const {
  OccupationVector out;
  for (const auto& e : entries_) {
    if (!contains_sorted(modes, e.first)) out.entries_.push_back(e);
  }
  return out;
}

PureState::PureState(std::vector<ModeId> modes, Terms terms) : modes_(std::move(modes)) {
  std::sort(modes_.begin(), modes_.end());
  if (std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end()) {
    throw UsageError("duplicate mode in state mode set");
  }
  for (auto& [occ, amp] : terms) {
    if (std::abs(amp) <= kAmplitudeFloor) continue;
    for (const auto& [mode, count] : occ.entries()) {
      if (!contains_sorted(modes_, mode)) {
        throw UsageError(fmt::format("term populates mode {} outside the state", to_string(mode)));
      }
    }
    terms_.emplace(occ, amp);
  }
}

bool PureState::has_mode(ModeId mode) const { return contains_sorted(modes_, mode); }

PureState::Amplitude PureState::amplitude(const OccupationVector& occ) const {
  auto it = terms_.find(occ);
  return it == terms_.end() ? Amplitude{} : it->second;
}

double PureState::norm() const {
  double s = 0.0;
  for (const auto& [occ, amp] : terms_) s += std::norm(amp);
  return std::sqrt(s);
}

PureState PureState::normalized() const {
  const double n = norm();
  if (n == 0.0) throw UsageError("cannot normalize the zero vector");
  return scaled(1.0 / n);
}

unsigned PureState::max_photons() const {
  unsigned m = 0;
  for (const auto& [occ, amp] : terms_) m = std::max(m, occ.total());
  return m;
}

bool PureState::is_vacuum() const { return max_photons() == 0; }

PureState PureState::scaled(Amplitude factor) const {
  Terms out;
  for (const auto& [occ, amp] : terms_) out.emplace(occ, amp * factor);
  return PureState(modes_, std::move(out));
}

PureState PureState::with_modes(std::span<const ModeId> extra) const {
  std::vector<ModeId> all = modes_;
  all.insert(all.end(), extra.begin(), extra.end());
  return PureState(sorted_unique(all), terms_);
}

std::string PureState::debug_string() const {
  std::string out;
  for (const auto& [occ, amp] : terms_) {
    std::string line;
    for (ModeId m : modes_) {
      if (!line.empty()) line += ' ';
      line += fmt::format("{}:{}", to_string(m), occ.count(m));
    }
    line += fmt::format(" -> ({:+.9f},{:+.9f})\n", amp.real() == 0.0 ? 0.0 : amp.real(),
                        amp.imag() == 0.0 ? 0.0 : amp.imag());
    out += line;
  }
  return out;
}

PureState::Amplitude inner_product(const PureState& a, const PureState& b) {
  PureState::Amplitude s{};
  for (const auto& [occ, amp] : a.terms()) s += std::conj(amp) * b.amplitude(occ);
  return s;
}

double distance_up_to_phase(const PureState& a, const PureState& b) {
  // Align b's global phase to a using the overlap, then take the max deviation.
  const auto overlap = inner_product(b, a);
  const PureState::Amplitude phase =
      std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : PureState::Amplitude{1.0};
  double worst = 0.0;
  for (const auto& [occ, amp] : a.terms()) {
    worst = std::max(worst, std::abs(amp - phase * b.amplitude(occ)));
  }
  for (const auto& [occ, amp] : b.terms()) {
    worst = std::max(worst, std::abs(a.amplitude(occ) - phase * amp));
  }
  return worst;
}

PureState vacuum(std::span<const ModeId> modes) {
  if (modes.empty()) throw UsageError("vacuum needs a non-empty mode set");
  PureState::Terms terms;
  terms.emplace(OccupationVector{}, 1.0);
  return PureState(std::vector<ModeId>(modes.begin(), modes.end()), std::move(terms));
}

PureState encode_qubit(Basis basis, Bit bit, TimeBin time, Path path) {
  return encode_pulse(basis, bit, 1, time, path, 1);
}

PureState encode_pulse(Basis basis, Bit bit, unsigned photons, TimeBin time, Path path,
                       unsigned max_photons) {
  if (bit > 1) throw UsageError("bit must be 0 or 1");
  if (photons > max_photons) {
    throw RegimeError(fmt::format("{} photons exceed the exact-regime bound {}; use MacroPulse",
                                  photons, max_photons));
  }
  const PulseId pulse{time, path};
  const ModeId h = pulse.mode(Polarization::H);
  const ModeId v = pulse.mode(Polarization::V);
  PureState::Terms terms;
  if (basis == Basis::computational) {
    OccupationVector occ;
    occ.set(bit == 0 ? h : v, photons);
    terms.emplace(occ, 1.0);
  } else {
    // (a_H^dag +/- a_V^dag)^n / sqrt(2^n n!) expanded binomially.
    const double sign = bit == 0 ? 1.0 : -1.0;
    const double prefactor = 1.0 / std::sqrt(std::pow(2.0, photons) * factorial(photons));
    for (unsigned kv = 0; kv <= photons; ++kv) {
      const unsigned kh = photons - kv;
      const double binom = factorial(photons) / (factorial(kh) * factorial(kv));
      OccupationVector occ;
      occ.set(h, kh);
      occ.set(v, kv);
      terms.emplace(occ, prefactor * binom * std::pow(sign, kv) *
                             std::sqrt(factorial(kh) * factorial(kv)));
    }
  }
  return PureState({h, v}, std::move(terms));
}

PureState tensor(const PureState& a, const PureState& b) {
  for (ModeId m : b.modes()) {
    if (a.has_mode(m)) {
      throw UsageError(fmt::format("tensor: mode {} appears in both factors", to_string(m)));
    }
  }
  std::vector<ModeId> modes = a.modes();
  modes.insert(modes.end(), b.modes().begin(), b.modes().end());
  PureState::Terms terms;
  for (const auto& [oa, aa] : a.terms()) {
    for (const auto& [ob, ab] : b.terms()) {
      OccupationVector occ = oa;
      for (const auto& [mode, count] : ob.entries()) occ.set(mode, count);
      terms.emplace(std::move(occ), aa * ab);
    }
  }
  return PureState(std::move(modes), std::move(terms));
}

std::map<OccupationVector, double> outcome_distribution(const PureState& state,
                                                        std::span<const ModeId> modes) {
  const std::vector<ModeId> measured = sorted_unique(modes);
  for (ModeId m : measured) {
    if (!state.has_mode(m)) {
      throw UsageError(fmt::format("measured mode {} is not part of the state", to_string(m)));
    }
  }
  std::map<OccupationVector, double> dist;
  double total = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    const double p = std::norm(amp);
    dist[occ.restricted_to(measured)] += p;
    total += p;
  }
  if (total > 0.0) {
    for (auto& [occ, p] : dist) p /= total;
  }
  return dist;
}

Measurement measure_occupation(const PureState& state, std::span<const ModeId> modes, Rng& rng) {
  const std::vector<ModeId> measured = sorted_unique(modes);
  const auto dist = outcome_distribution(state, measured);
  if (dist.empty()) throw UsageError("cannot measure the zero vector");
  const double u = rng.uniform();
  double acc = 0.0;
  OccupationVector chosen = std::prev(dist.end())->first;
  for (const auto& [occ, p] : dist) {
    acc += p;
    if (u < acc) {
      chosen = occ;
      break;
    }
  }
  PureState::Terms kept;
  for (const auto& [occ, amp] : state.terms()) {
    if (occ.restricted_to(measured) == chosen) kept.emplace(occ, amp);
  }
  return {chosen, PureState(state.modes(), std::move(kept)).normalized()};
}

std::pair<PureState, PureState> factor_product(const PureState& state,
                                               std::span<const ModeId> modes) {
  const std::vector<ModeId> left_modes = sorted_unique(modes);
  std::vector<ModeId> right_modes;
  for (ModeId m : state.modes()) {
    if (!contains_sorted(left_modes, m)) right_modes.push_back(m);
  }
  if (state.terms().empty()) throw UsageError("cannot factor the zero vector");

  // Anchor on the largest term; a product state's amplitudes factor through it.
  auto anchor = std::max_element(
      state.terms().begin(), state.terms().end(),
      [](const auto& x, const auto& y) { return std::abs(x.second) < std::abs(y.second); });
  const OccupationVector anchor_left = anchor->first.restricted_to(left_modes);
  const OccupationVector anchor_right = anchor->first.without(left_modes);

  PureState::Terms left_terms;
  PureState::Terms right_terms;
  for (const auto& [occ, amp] : state.terms()) {
    if (occ.without(left_modes) == anchor_right) left_terms[occ.restricted_to(left_modes)] = amp;
    if (occ.restricted_to(left_modes) == anchor_left) right_terms[occ.without(left_modes)] = amp;
  }
  PureState left = PureState(left_modes, std::move(left_terms)).normalized();
  PureState right = PureState(right_modes, std::move(right_terms)).normalized();

  const PureState rebuilt = tensor(left, right);
  if (distance_up_to_phase(rebuilt, state.normalized()) > 1e-9) {
    throw UsageError("state is entangled across the requested cut");
  }
  return {std::move(left), std::move(right)};
}

}  // namespace qkdsim
