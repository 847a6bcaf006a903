#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "keyorder/model.hpp"

namespace keyorder {

enum class ModelVariant : std::uint8_t { StaticBaseline, StaticNoIntendedReceiver, DynamicSkeleton };

struct ModelAsset {
  ModelVariant variant;
  std::string path;                    // absolute
  std::vector<std::string> scenarios;  // absolute
  std::size_t expected_classes;
  std::size_t expected_chain;
};

/// Root of the bundled models/ and scenarios/ directories. Overridable with
/// the KEYORDER_ASSET_DIR environment variable.
std::string asset_root();
std::string asset_path(std::string_view relative);

ModelAsset asset(ModelVariant v);
std::vector<ModelAsset> all_assets();
Model load_asset(ModelVariant v);
std::string_view to_string(ModelVariant v);

}  // namespace keyorder
