// Flat key-value run configuration: dotted section keys, one key per line,
// '#' comments. All model/cost assumptions are validated at load.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "cht/control.hpp"
#include "cht/cost.hpp"
#include "cht/grid.hpp"
#include "cht/model.hpp"
#include "cht/state.hpp"

namespace cht {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config load(const std::string& path);
  static Config from_text(const std::string& text, const std::string& origin = "<text>");

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  std::uint64_t seed(std::uint64_t fallback) const;

  // Error text carrying the key's line number.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  const std::string& raw_text() const { return text_; }
  std::uint64_t hash() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries_;
  std::string text_;
  std::string origin_;
};

// Builders from a validated config. Each throws ConfigError with a
// line-numbered message on invalid input.
Grid make_grid(const Config& c);
ModelSpec make_model(const Config& c);
SchemeParams make_scheme(const Config& c, const ModelSpec& m);
Field make_initial_field(const Config& c, const Grid& g, const std::string& key,
                         std::uint64_t seed);
Control make_control(const Config& c, const Grid& g, double t_end);
CostSpec make_cost(const Config& c, const Grid& g);

}  // namespace cht
