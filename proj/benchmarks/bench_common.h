#ifndef NL2PLAN_BENCHMARKS_BENCH_COMMON_H
#define NL2PLAN_BENCHMARKS_BENCH_COMMON_H

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

inline std::string bench_file(const std::string& rel) {
  std::ifstream in(std::filesystem::path(NL2PLAN_DATA_DIR) / rel, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

#endif
