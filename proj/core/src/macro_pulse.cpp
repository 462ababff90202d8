#include "qkdsim/macro_pulse.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "qkdsim/errors.hpp"

namespace qkdsim {

MacroPulse::MacroPulse(std::map<ModeId, Field> fields, double background)
    : background_(background) {
  if (!(background >= 0.0)) throw UsageError("background illumination must be non-negative");
  for (auto& [mode, field] : fields) {
    if (std::norm(field) > 0.0) fields_.emplace(mode, field);
  }
}

MacroPulse MacroPulse::polarized(Basis basis, Bit bit, double photons, PulseId pulse,
                                 double background) {
  double angle = bit == 0 ? 0.0 : std::numbers::pi / 2;
  if (basis == Basis::hadamard) angle = bit == 0 ? std::numbers::pi / 4 : -std::numbers::pi / 4;
  return linear(angle, photons, pulse, background);
}

MacroPulse MacroPulse::linear(double angle, double photons, PulseId pulse, double background) {
  if (!(photons >= 0.0)) throw UsageError("pulse intensity must be non-negative");
  const double amp = std::sqrt(photons);
  std::map<ModeId, Field> fields;
  fields[pulse.mode(Polarization::H)] = amp * std::cos(angle);
  fields[pulse.mode(Polarization::V)] = amp * std::sin(angle);
  return MacroPulse(std::move(fields), background);
}

double MacroPulse::intensity(ModeId mode) const {
  auto it = fields_.find(mode);
  return it == fields_.end() ? 0.0 : std::norm(it->second);
}

std::map<ModeId, double> MacroPulse::intensities() const {
  std::map<ModeId, double> out;
  for (const auto& [mode, field] : fields_) out[mode] = std::norm(field);
  return out;
}

double MacroPulse::total_intensity() const {
  double s = 0.0;
  for (const auto& [mode, field] : fields_) s += std::norm(field);
  return s;
}

MacroPulse MacroPulse::with_background(double background) const {
  return MacroPulse(fields_, background);
}

std::string MacroPulse::describe() const {
  std::string out = "macro{";
  bool first = true;
  for (const auto& [mode, field] : fields_) {
    if (std::norm(field) < 1e-9) continue;
    if (!first) out += ", ";
    first = false;
    out += fmt::format("{}: {:.6g}", to_string(mode), std::norm(field));
    if (std::abs(field.imag()) > 1e-12 || field.real() < 0.0) {
      out += fmt::format(" (phase {:.4f})", std::arg(field));
    }
  }
  out += fmt::format("; background {:.6g}}}", background_);
  return out;
}

}  // namespace qkdsim
