#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "cudfopt/cudfopt.hpp"

namespace fixtures {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string sample_path(const std::string& name) { return std::string(CUDFOPT_SAMPLES) + "/" + name; }

// Small example universe with a conflict, a virtual provider, an upgrade
// and one recommendation.
inline const cudfopt::CudfDocument& upgrade_sample() {
  static const auto doc = cudfopt::parse_document(read_file(sample_path("upgrade.cudf")));
  return doc;
}

inline cudfopt::PackageId pkg(const std::string& name, cudfopt::Version v) { return {name, v}; }

}  // namespace fixtures
