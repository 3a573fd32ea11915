#include "corrspec/version.hpp"

#include <string>

#include <Eigen/Core>
#include <fftw3.h>
#include <spdlog/version.h>

namespace corrspec {

nlohmann::json build_info() {
  return {
      {"corrspec", "0.1.0"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"fftw", std::string(fftw_version)},
      {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                     std::to_string(SPDLOG_VER_PATCH)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"compiler", __VERSION__},
  };
}

}  // namespace corrspec
