// Copyright 2026 The dpopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dpopt/apps/cache.hpp"
#include "dpopt/apps/sketch_apps.hpp"

namespace dpopt::apps {

struct AppOptions {
  CacheOptions cache;
  CmsOptions cms;
  MhtOptions mht;
  PrecisionOptions precision;
  FridgeOptions fridge;
};

inline const std::vector<std::string>& app_names() {
  static const std::vector<std::string> names{"cache", "cms", "mht", "precision", "fridge"};
  return names;
}

inline std::unique_ptr<SketchProgram> make_app(const std::string& name, const AppOptions& opts = {}) {
  if (name == "cache") return std::make_unique<CacheApp>(opts.cache);
  if (name == "cms") return std::make_unique<CmsApp>(opts.cms);
  if (name == "mht") return std::make_unique<MhtApp>(opts.mht);
  if (name == "precision") return std::make_unique<PrecisionApp>(opts.precision);
  if (name == "fridge") return std::make_unique<FridgeApp>(opts.fridge);
  throw Error("unknown app '" + name + "'");
}

}  // namespace dpopt::apps
