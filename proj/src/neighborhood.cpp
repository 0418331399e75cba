#include "tlsys/neighborhood.hpp"

#include "tlsys/error.hpp"

namespace tlsys {

std::string_view to_string(Role r) noexcept { return r == Role::source ? "source" : "target"; }

Role parse_role(std::string_view s) {
  if (s == "source") return Role::source;
  if (s == "target") return Role::target;
  fail(ErrorCode::InvalidSpec, "unknown role '" + std::string(s) + "'");
}

}  // namespace tlsys
