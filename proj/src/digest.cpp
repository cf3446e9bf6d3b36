#include "qfgp/digest.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace qfgp {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string json_digest(const nlohmann::json& j) {
  // nlohmann::json objects are std::map backed, so dump() is key-sorted.
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace qfgp
