// Copyright 2026 The devafuse Authors
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

// Stand-alone external propagator: answers queries with the last non-empty
// mask seen per id, i.e. identity propagation. Speaks the line protocol on
// stdin/stdout.
//
//   echo_propagator [--crash-after N]

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

using nlohmann::json;

int main(int argc, char** argv) {
  long crash_after = -1;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--crash-after") crash_after = std::atol(argv[i + 1]);
  }
  std::map<long long, json> memory;
  std::string line;
  long handled = 0;
  while (std::getline(std::cin, line)) {
    if (crash_after >= 0 && handled++ >= crash_after) return 3;
    const json req = json::parse(line);
    const std::string cmd = req.at("cmd");
    json reply = json::object();
    if (cmd == "update") {
      for (const auto& s : req.at("segments")) {
        const auto& rle = s.at("rle");
        if (rle.size() > 1) memory[s.at("id").get<long long>()] = s;
      }
    } else if (cmd == "query") {
      json segs = json::array();
      for (const auto& [id, s] : memory) segs.push_back(s);
      reply = {{"frame", req.at("frame")}, {"segments", segs}};
    } else if (cmd == "remove") {
      for (const auto& id : req.at("ids")) memory.erase(id.get<long long>());
    } else if (cmd == "reset") {
      memory.clear();
    }
    std::cout << reply.dump() << "\n" << std::flush;
  }
  return 0;
}
