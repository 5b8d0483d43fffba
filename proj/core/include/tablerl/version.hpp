#pragma once

namespace tablerl {

inline constexpr const char* kEngineVersion = "tablerl/0.1.0";

}  // namespace tablerl
