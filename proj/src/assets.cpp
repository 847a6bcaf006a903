#include "keyorder/assets.hpp"

#include <cstdlib>
#include <stdexcept>

namespace keyorder {

std::string asset_root() {
  if (const char* env = std::getenv("KEYORDER_ASSET_DIR"); env && *env) return env;
  return KEYORDER_ASSET_DIR;
}

std::string asset_path(std::string_view relative) { return asset_root() + "/" + std::string(relative); }

ModelAsset asset(ModelVariant v) {
  switch (v) {
    case ModelVariant::StaticBaseline:
      return {v,
              asset_path("models/ensemble_static.spk"),
              {asset_path("scenarios/static_full_run.txt"), asset_path("scenarios/static_reveal_jrek.txt")},
              10,
              6};
    case ModelVariant::StaticNoIntendedReceiver:
      return {v,
              asset_path("models/ensemble_static_nomatch.spk"),
              {asset_path("scenarios/static_full_run.txt"), asset_path("scenarios/nomatch_misbinding.txt")},
              10,
              6};
    case ModelVariant::DynamicSkeleton:
      return {v, asset_path("models/ensemble_dynamic.spk"), {asset_path("scenarios/dynamic_two_platoons.txt")}, 10, 6};
  }
  throw std::invalid_argument("unknown model variant");
}

std::vector<ModelAsset> all_assets() {
  return {asset(ModelVariant::StaticBaseline), asset(ModelVariant::StaticNoIntendedReceiver),
          asset(ModelVariant::DynamicSkeleton)};
}

Model load_asset(ModelVariant v) { return load_model(asset(v).path); }

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::StaticBaseline: return "StaticBaseline";
    case ModelVariant::StaticNoIntendedReceiver: return "StaticNoIntendedReceiver";
    case ModelVariant::DynamicSkeleton: return "DynamicSkeleton";
  }
  return "?";
}

}  // namespace keyorder
