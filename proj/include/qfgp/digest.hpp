#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace qfgp {

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hex FNV-1a digest of the canonical (sorted-key, compact) JSON dump.
std::string json_digest(const nlohmann::json& j);

}  // namespace qfgp
