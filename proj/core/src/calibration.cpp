#include "conclab/calibration.hpp"

#include <cmath>
#include <sstream>

#include "conclab/format.hpp"
#include "conclab/numerics.hpp"

namespace conclab {

double CalibrationSet::get(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? 1.0 : it->second.value;
}

void CalibrationSet::set(const std::string& name, double value, std::string provenance) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw PreconditionError("calibration constant '" + name + "' must be positive and finite");
  entries_[name] = {value, std::move(provenance)};
}

void CalibrationSet::set_fitted(const std::string& name, double value,
                                const std::string& experiment, unsigned long long seed,
                                long long trials) {
  std::ostringstream os;
  os << "fitted(" << experiment << ", seed=" << seed << ", trials=" << trials << ")";
  set(name, value, os.str());
}

const CalibrationEntry& CalibrationSet::entry(const std::string& name) const {
  static const CalibrationEntry fallback;
  auto it = entries_.find(name);
  return it == entries_.end() ? fallback : it->second;
}

std::string CalibrationSet::id() const {
  if (entries_.empty()) return "default";
  std::string out;
  for (const auto& [name, e] : entries_) {
    if (!out.empty()) out += ';';
    out += name + "=" + format_double(e.value);
  }
  return out;
}

}  // namespace conclab
