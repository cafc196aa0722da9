#include "specsense/solver_result.hpp"

#include <array>
#include <utility>

namespace specsense {

namespace {
constexpr std::array<std::pair<unsigned, const char*>, 6> kFlagNames = {{
    {kFlagStall, "stall"},
    {kFlagCapacityStop, "capacity_stop"},
    {kFlagDegenerate, "degenerate"},
    {kFlagNotConverged, "not_converged"},
    {kFlagBandMissed, "band_missed"},
    {kFlagDiverged, "diverged"},
}};
}

std::string flags_to_string(unsigned flags) {
  std::string out;
  for (const auto& [bit, name] : kFlagNames) {
    if (!(flags & bit)) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out;
}

unsigned flags_from_string(const std::string& s) {
  unsigned flags = 0;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t end = s.find('|', pos);
    if (end == std::string::npos) end = s.size();
    const std::string token = s.substr(pos, end - pos);
    for (const auto& [bit, name] : kFlagNames) {
      if (token == name) flags |= bit;
    }
    pos = end + 1;
  }
  return flags;
}

}  // namespace specsense
