// Misbehaving workers for the bridge's error paths.
//   --mode drop      omit the first test id
//   --mode hang      never answer train_predict
//   --mode exit      exit with status 3 on train_predict
//   --mode error     answer {"status":"error"}
//   --mode garbage   answer a non-JSON line
//   --mode record P  answer like majority_worker and append each request to P
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "stub_io.hpp"

int main(int argc, char** argv) {
  std::string mode = "drop", record;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--mode") mode = argv[i + 1];
    if (std::string(argv[i]) == "--record") record = argv[i + 1];
  }
  return stub::serve([&](const stub::json& msg) -> stub::json {
    if (!record.empty()) {
      std::ofstream(record, std::ios::app) << msg.dump() << '\n';
    }
    if (mode == "hang") std::this_thread::sleep_for(std::chrono::hours(1));
    if (mode == "exit") std::exit(3);
    if (mode == "error") return {{"status", "error"}, {"message", "out of memory"}};
    if (mode == "garbage") {
      std::cout << "this is not json\n" << std::flush;
      return {{"status", "ok"}, {"predictions", stub::json::array()}};
    }
    std::map<int, int> counts;
    for (const auto& t : msg.at("train")) ++counts[t.at("label").get<int>()];
    int label = 0, best_count = -1;
    for (auto [l, count] : counts) {
      if (count > best_count) {
        label = l;
        best_count = count;
      }
    }
    stub::json preds = stub::json::array();
    bool first = true;
    for (const auto& t : msg.at("test")) {
      if (mode == "drop" && first) {
        first = false;
        continue;
      }
      preds.push_back({{"id", t.at("id")}, {"label", label}});
    }
    return {{"status", "ok"}, {"predictions", preds}};
  });
}
