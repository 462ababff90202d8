#pragma once

#include <complex>
#include <map>
#include <string>

#include "qkdsim/mode.hpp"

namespace qkdsim {

/// Semiclassical description of bright light: a classical field amplitude per
/// mode, so that mean photon number per gate is |amplitude|^2. Keeping the
/// phase lets diagonal polarizations route through the same linear optics as
/// the exact regime. `background` is the continuous illumination reaching each
/// detector per gate, in photons.
class MacroPulse {
 public:
  using Field = std::complex<double>;

  MacroPulse() = default;
  MacroPulse(std::map<ModeId, Field> fields, double background);

  /// `photons` photons in the polarization encoding (basis, bit) of a pulse.
  static MacroPulse polarized(Basis basis, Bit bit, double photons, PulseId pulse,
                              double background = 0.0);
  /// `photons` photons polarized at `angle` radians from H toward V.
  static MacroPulse linear(double angle, double photons, PulseId pulse, double background = 0.0);

  const std::map<ModeId, Field>& fields() const { return fields_; }
  double background() const { return background_; }
  double intensity(ModeId mode) const;
  std::map<ModeId, double> intensities() const;
  double total_intensity() const;

  MacroPulse with_background(double background) const;
  std::string describe() const;

 private:
  std::map<ModeId, Field> fields_;
  double background_ = 0.0;
};

}  // namespace qkdsim
