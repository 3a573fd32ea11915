#pragma once

#include <json.hpp>

namespace corrspec {

/// Library and dependency versions recorded in run manifests.
nlohmann::json build_info();

}  // namespace corrspec
