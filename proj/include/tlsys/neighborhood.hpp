#pragma once

// Result shape shared by the structural, behavioral and empirical
// transferability scans.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tlsys {

/// Source role: transfer from the system to each member. Target role: from
/// each member to the system.
enum class Role { source, target };

std::string_view to_string(Role r) noexcept;
Role parse_role(std::string_view s);

struct NeighborhoodEntry {
  std::size_t index = 0;
  std::string name;
  /// Score compared against the threshold (error, bound or distance).
  double value = 0.0;
  double threshold = 0.0;
  bool member = false;
};

struct SkippedMember {
  std::size_t index = 0;
  std::string name;
  std::string reason;
};

struct Neighborhood {
  Role role = Role::source;
  std::vector<NeighborhoodEntry> entries;
  std::vector<SkippedMember> skipped;

  std::size_t cardinality() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.member;
    return n;
  }
  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (const auto& e : entries)
      if (e.member) out.push_back(e.index);
    return out;
  }
};

}  // namespace tlsys
