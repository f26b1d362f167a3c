// Named positive constants standing in for unspecified universal constants,
// each defaulting to 1 and carrying where its value came from.
#pragma once

#include <map>
#include <string>

namespace conclab {

struct CalibrationEntry {
  double value = 1.0;
  std::string provenance = "default";  // "default" or "fitted(<experiment>, seed=..., trials=...)"
};

class CalibrationSet {
 public:
  // Value of a constant; 1 when it was never set.
  double get(const std::string& name) const;
  void set(const std::string& name, double value, std::string provenance = "override");
  void set_fitted(const std::string& name, double value, const std::string& experiment,
                  unsigned long long seed, long long trials);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const CalibrationEntry& entry(const std::string& name) const;
  const std::map<std::string, CalibrationEntry>& entries() const { return entries_; }
  // Stable identifier of the current contents, for tagging exported curves.
  std::string id() const;

 private:
  std::map<std::string, CalibrationEntry> entries_;
};

}  // namespace conclab
