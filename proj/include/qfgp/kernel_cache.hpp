#pragma once

#include <cstddef>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "qfgp/kernel.hpp"

namespace qfgp {

inline constexpr int kKernelFileFormatVersion = 1;

/// Writes a table as a versioned JSON record. Doubles round-trip exactly.
void save_kernel_table(const KernelTable& table, const KernelConfig& cfg,
                       const std::filesystem::path& path);
/// Reads a record written by save_kernel_table; rejects other format versions.
KernelTable load_kernel_table(const std::filesystem::path& path);

/// Content-addressed store of unit-coupling kernel tables keyed by
/// (shape digest, dt, t_max). Tables are computed once per key, shared
/// read-only, and rescaled to the requested coupling on the way out.
/// Optionally backed by a directory of table files.
class KernelCache {
 public:
  explicit KernelCache(std::optional<std::filesystem::path> dir = std::nullopt);

  /// Directory from $QFGP_CACHE_DIR, or memory-only if unset.
  static KernelCache from_environment();

  KernelTable get(const KernelConfig& cfg, double delta_ratio, double t_max, double dt,
                  int workers = 1);

  std::size_t hits() const;
  std::size_t misses() const;
  const std::optional<std::filesystem::path>& directory() const { return dir_; }

  static std::string key(const KernelConfig& cfg, double t_max, double dt);

 private:
  using Entry = std::shared_future<std::shared_ptr<const KernelTable>>;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace qfgp
