#include "qkdsim/mode.hpp"

#include <algorithm>

namespace qkdsim {

std::string_view to_string(TimeBin t) {
  switch (t) {
    case TimeBin::t0:
      return "t0";
    case TimeBin::t_half:
      return "t_half";
    case TimeBin::t1:
      return "t1";
  }
  return "?";
}

std::string_view to_string(Path p) {
  switch (p) {
    case Path::regular:
      return "r";
    case Path::blocked:
      return "b";
    case Path::computational_arm:
      return "arm_c";
    case Path::hadamard_arm:
      return "arm_h";
    case Path::memory:
      return "mem";
  }
  return "?";
}

std::string_view to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }

std::string_view to_string(Basis b) {
  return b == Basis::computational ? "computational" : "hadamard";
}

std::string to_string(ModeId m) {
  std::string out;
  out.append(to_string(m.time)).append(".").append(to_string(m.path)).append(".");
  out.append(to_string(m.pol));
  return out;
}

std::string to_string(PulseId p) {
  std::string out;
  out.append(to_string(p.time)).append(".").append(to_string(p.path));
  return out;
}

std::optional<TimeBin> parse_time_bin(std::string_view s) {
  for (TimeBin t : kAllTimeBins) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<Basis> parse_basis(std::string_view s) {
  for (Basis b : kBases) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

std::vector<ModeId> modes_of(const std::vector<PulseId>& pulses) {
  std::vector<ModeId> out;
  for (const PulseId& p : pulses) {
    for (Polarization pol : kPolarizations) out.push_back(p.mode(pol));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace qkdsim
