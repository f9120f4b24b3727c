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

#include "dpopt/apps/cache.hpp"
#include "dpopt/apps/registry.hpp"
#include "dpopt/apps/sketch_apps.hpp"
#include "dpopt/common.hpp"
#include "dpopt/objective.hpp"
#include "dpopt/optimizer.hpp"
#include "dpopt/params.hpp"
#include "dpopt/pipeline.hpp"
#include "dpopt/pipeline_model.hpp"
#include "dpopt/preprocess.hpp"
#include "dpopt/search/lattice.hpp"
#include "dpopt/search/strategies.hpp"
#include "dpopt/sim.hpp"
#include "dpopt/structures.hpp"
#include "dpopt/traces.hpp"
