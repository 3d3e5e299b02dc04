#include "prif/core.h"

#include <stdexcept>

namespace prif {

bool message_is_expired(const Message& m, SimTime now) {
  return (now - m.created_at) > m.ttl_seconds();
}

ContactEvent make_contact(NodeId x, NodeId y, SimTime start, SimTime end) {
  if (x == y) throw std::invalid_argument("contact endpoints must differ");
  if (!(start < end)) throw std::invalid_argument("contact requires start < end");
  if (y < x) std::swap(x, y);
  return ContactEvent{x, y, start, end};
}

std::string to_string(NodeId n) { return std::to_string(n.value); }

}  // namespace prif
