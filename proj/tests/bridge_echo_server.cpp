// Minimal bridge server used by the tests.
//
//   bridge_echo_server [--mode rowsum|ols] [--coefs c0,c1,...]
//                      [--advertise N] [--parallel] [--silent]
//                      [--bad-frame] [--wrong-type] [--error-on ID]
//                      [--die-after N] [--short-reply]
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;

int main(int argc, char** argv) {
  std::string mode = "rowsum";
  std::vector<double> coefs;
  int advertise = -1;
  bool parallel = false, silent = false, bad_frame = false, wrong_type = false,
       short_reply = false;
  long error_on = -1;
  int die_after = -1;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) std::exit(64);
      return argv[++i];
    };
    if (arg == "--mode") {
      mode = next();
    } else if (arg == "--coefs") {
      std::stringstream ss(next());
      std::string item;
      while (std::getline(ss, item, ',')) coefs.push_back(std::stod(item));
    } else if (arg == "--advertise") {
      advertise = std::stoi(next());
    } else if (arg == "--parallel") {
      parallel = true;
    } else if (arg == "--silent") {
      silent = true;
    } else if (arg == "--bad-frame") {
      bad_frame = true;
    } else if (arg == "--wrong-type") {
      wrong_type = true;
    } else if (arg == "--short-reply") {
      short_reply = true;
    } else if (arg == "--error-on") {
      error_on = std::stol(next());
    } else if (arg == "--die-after") {
      die_after = std::stoi(next());
    } else {
      std::cerr << "unknown argument " << arg << "\n";
      return 64;
    }
  }

  std::string line;
  int answered = 0;
  while (std::getline(std::cin, line)) {
    json frame;
    try {
      frame = json::parse(line);
    } catch (const json::exception&) {
      std::cerr << "bad input frame\n";
      continue;
    }
    const std::string type = frame.value("type", "");
    if (type == "hello") {
      if (silent) continue;
      const int p = advertise >= 0 ? advertise : frame["features"].get<int>();
      std::cout << json{{"type", "ready"}, {"features", p}, {"parallel", parallel}}.dump()
                << std::endl;
    } else if (type == "predict") {
      if (die_after >= 0 && answered >= die_after) return 3;
      const auto id = frame["id"].get<long>();
      if (bad_frame) {
        std::cout << "this is not json" << std::endl;
        continue;
      }
      if (wrong_type) {
        std::cout << json{{"type", "bogus"}, {"id", id}}.dump() << std::endl;
        continue;
      }
      if (id == error_on) {
        std::cout << json{{"type", "error"}, {"id", id}, {"message", "refused"}}.dump()
                  << std::endl;
        continue;
      }
      json y = json::array();
      for (const auto& row : frame["x"]) {
        double value = 0.0;
        if (mode == "ols") {
          value = coefs.empty() ? 0.0 : coefs[0];
          for (std::size_t j = 0; j < row.size() && j + 1 < coefs.size(); ++j) {
            value += coefs[j + 1] * row[j].get<double>();
          }
        } else {
          for (const auto& v : row) value += v.get<double>();
        }
        y.push_back(value);
      }
      if (short_reply && !y.empty()) y.erase(y.size() - 1);
      std::cout << json{{"type", "prediction"}, {"id", id}, {"y", y}}.dump() << std::endl;
      ++answered;
    } else if (type == "shutdown") {
      return 0;
    }
  }
  return 0;
}
