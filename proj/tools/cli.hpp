#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mdsc::cli {

struct RunConfig {
  std::string command;
  std::string source;
  std::string distortion = "hamming";
  std::optional<double> level;
  std::optional<double> rate;
  std::optional<std::string> eps;  // "c,t"
  std::optional<std::string> ns;   // grid spec
  std::optional<std::string> regime;
  std::string side = "excess";
  std::string format = "json";
  std::optional<std::string> out;
  unsigned threads = 0;  // 0: hardware parallelism
  std::int64_t budget = 10'000'000;
  std::string deltas = "0.05,0.025,0.0125";
  std::optional<std::string> type;  // counts, "2,2"
  std::optional<std::int64_t> n;
  std::optional<double> covering_constant;
  bool bits = false;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

/// Parses argv (argv[0] is the program name). Throws CLI::ParseError.
RunConfig parse_args(int argc, const char* const* argv);

/// "a:b:log" (12 log-spaced integers), "a:b:lin" (12 evenly spaced) or a
/// comma list. Values may use exponent notation; duplicates are dropped.
std::vector<std::int64_t> expand_grid(std::string_view spec);

/// Whole front end: parse, validate, compute, emit. Returns the exit status
/// (0 ok, 2 invalid input, 3 computation failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdsc::cli
