#include "qfgp/kernel_cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfgp/digest.hpp"
#include "qfgp/error.hpp"
#include "qfgp/parallel.hpp"

namespace qfgp {

namespace fs = std::filesystem;

void save_kernel_table(const KernelTable& table, const KernelConfig& cfg, const fs::path& path) {
  nlohmann::json j;
  j["format"] = "qfgp-kernel-table";
  j["format_version"] = kKernelFileFormatVersion;
  j["config_digest"] = table.config_hash;
  j["config"] = cfg;
  j["coupling_g"] = table.coupling_g;
  j["dt"] = table.dt;
  j["t_max"] = table.t_max;
  j["tail_estimate"] = table.tail_estimate;
  j["t"] = table.t;
  j["nu"] = table.nu;
  j["eta"] = table.eta;

  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      throw Error("io", "cannot write kernel table " + tmp.string());
    }
    out << j.dump();
  }
  fs::rename(tmp, path);
}

KernelTable load_kernel_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("io", "cannot read kernel table " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("io", "corrupt kernel table " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "qfgp-kernel-table" ||
      j.value("format_version", -1) != kKernelFileFormatVersion) {
    throw Error("io", "unsupported kernel table format in " + path.string());
  }
  KernelTable t;
  t.config_hash = j.at("config_digest").get<std::string>();
  t.coupling_g = j.at("coupling_g").get<double>();
  t.dt = j.at("dt").get<double>();
  t.t_max = j.at("t_max").get<double>();
  t.tail_estimate = j.at("tail_estimate").get<double>();
  t.t = j.at("t").get<std::vector<double>>();
  t.nu = j.at("nu").get<std::vector<double>>();
  t.eta = j.at("eta").get<std::vector<double>>();
  if (t.nu.size() != t.t.size() || t.eta.size() != t.t.size()) {
    throw Error("io", "kernel table column length mismatch in " + path.string());
  }
  return t;
}

KernelCache::KernelCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {}

KernelCache KernelCache::from_environment() {
  if (const char* env = std::getenv(kCacheDirEnv); env && *env) {
    return KernelCache(fs::path(env));
  }
  return KernelCache();
}

std::string KernelCache::key(const KernelConfig& cfg, double t_max, double dt) {
  nlohmann::json j{{"shape", shape_digest(cfg)}, {"t_max", t_max}, {"dt", dt}};
  return json_digest(j);
}

KernelTable KernelCache::get(const KernelConfig& cfg, double delta_ratio, double t_max, double dt,
                             int workers) {
  validate(cfg);
  check_grid(cfg.material, delta_ratio, t_max, dt);
  const std::string k = key(cfg, t_max, dt);

  std::promise<std::shared_ptr<const KernelTable>> promise;
  Entry entry;
  bool owner = false;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(k);
    if (it != entries_.end()) {
      ++hits_;
      entry = it->second;
    } else {
      ++misses_;
      entry = promise.get_future().share();
      entries_.emplace(k, entry);
      owner = true;
    }
  }

  if (owner) {
    try {
      KernelConfig unit = cfg;
      unit.coupling_g = 1.0;
      std::shared_ptr<const KernelTable> table;
      const fs::path file = dir_ ? *dir_ / ("kernel_" + k + ".json") : fs::path();
      if (dir_ && fs::exists(file)) {
        table = std::make_shared<KernelTable>(load_kernel_table(file));
      }
      if (!table) {
        auto built = std::make_shared<KernelTable>(tabulate(unit, delta_ratio, t_max, dt, workers));
        if (dir_) save_kernel_table(*built, unit, file);
        table = std::move(built);
      }
      promise.set_value(table);
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard<std::mutex> lock(mutex_);
      entries_.erase(k);
      throw;
    }
  }

  const std::shared_ptr<const KernelTable> unit_table = entry.get();
  KernelTable out = unit_table->scaled(cfg.coupling_g);
  out.config_hash = config_digest(cfg);
  return out;
}

std::size_t KernelCache::hits() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return hits_;
}

std::size_t KernelCache::misses() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return misses_;
}

}  // namespace qfgp
