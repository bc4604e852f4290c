#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "distinctbo/experiment.h"
#include "distinctbo/orchestrator.h"
#include "distinctbo/synthetic_market.h"

namespace testing {

// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("distinctbo-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline const distinctbo::PriceSeries& sector_market() {
  static const distinctbo::PriceSeries series =
      distinctbo::generate_market(distinctbo::two_group_market_spec(), 20161);
  return series;
}

// Small budgets and cheap acquisition so sessions finish in well under a
// second.
inline distinctbo::SessionConfig fast_config(std::uint64_t seed = 1) {
  distinctbo::SessionConfig c;
  c.n_phase1 = 14;
  c.n_phase2 = 5;
  c.m = 4;
  c.init_design = 6;
  c.seed = seed;
  c.gp.n_restarts = 2;
  c.acquisition.n_candidates = 256;
  c.acquisition.n_polish_starts = 2;
  c.acquisition.polish_iterations = 20;
  return c;
}

inline distinctbo::Objective sector_objective(const std::string& anchor = "2016-03-09") {
  return distinctbo::sharpe_objective_for(sector_market(), distinctbo::parse_date(anchor), 10);
}

}  // namespace testing
