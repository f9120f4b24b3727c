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

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "dpopt/common.hpp"

namespace dpopt {

/// Per-stage budgets of an RMT-style pipeline. Defaults are desk-scale and
/// overridable from a key=value file.
struct PipelineModel {
  std::int64_t stages = 12;
  std::int64_t sram_words_per_stage = 4096;
  std::int64_t hash_units_per_stage = 6;
  std::int64_t alu_slots_per_stage = 8;

  void validate() const {
    if (stages < 1 || sram_words_per_stage < 1 || hash_units_per_stage < 1 ||
        alu_slots_per_stage < 1) {
      throw Error("pipeline model: every budget must be >= 1");
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "alu_slots_per_stage=" << alu_slots_per_stage << '\n'
       << "hash_units_per_stage=" << hash_units_per_stage << '\n'
       << "sram_words_per_stage=" << sram_words_per_stage << '\n'
       << "stages=" << stages << '\n';
    return os.str();
  }

  /// Stable identifier embedded in reports.
  std::string hash_hex() const {
    std::ostringstream os;
    os << std::hex << fnv1a(to_text());
    return os.str();
  }

  friend bool operator==(const PipelineModel&, const PipelineModel&) = default;

  /// Parses `key=value` lines; unknown keys are rejected, missing keys keep
  /// their defaults. `#` starts a comment.
  static PipelineModel parse(std::istream& in) {
    PipelineModel pipe;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error("pipeline config line " + std::to_string(lineno) + ": expected key=value");
      }
      auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      std::int64_t v = 0;
      try {
        std::size_t used = 0;
        v = std::stoll(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
      } catch (const std::exception&) {
        throw Error("pipeline config line " + std::to_string(lineno) + ": bad integer '" + val + "'");
      }
      if (key == "stages") pipe.stages = v;
      else if (key == "sram_words_per_stage") pipe.sram_words_per_stage = v;
      else if (key == "hash_units_per_stage") pipe.hash_units_per_stage = v;
      else if (key == "alu_slots_per_stage") pipe.alu_slots_per_stage = v;
      else throw Error("pipeline config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    pipe.validate();
    return pipe;
  }

  static PipelineModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pipeline config: " + path);
    return parse(in);
  }
};

}  // namespace dpopt
