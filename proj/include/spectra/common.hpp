#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectra {

// Error taxonomy shared by the C++ core and the C API status codes.
enum class Code : int {
  ok = 0,
  validation = 1,   // malformed inputs (bad values, bad dimensions)
  config = 2,       // config file / schema problems
  domain = 3,       // argument outside the mathematical domain (poles, support)
  numeric = 4,      // iteration caps, non-convergence
  structure = 5,    // bulk-structure pattern violates the supported shape
  precondition = 6, // API called out of order / on wrong inputs
  io = 7,           // file system problems
};

class Error : public std::runtime_error {
 public:
  Error(Code code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

// One entry of a report-style check (never throws; callers inspect pass/fail).
struct CheckItem {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // limit it was compared against
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckItem> items;

  bool all_pass() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
  void add(std::string name, bool pass, double value, double threshold,
           std::string detail = "") {
    items.push_back({std::move(name), pass, value, threshold, std::move(detail)});
  }
};

// Minimal stderr logger controlled by the SPECTRA_LOG environment variable
// (error|warn|info|debug, default warn).
enum class LogLevel : int { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level();
void log_msg(LogLevel level, const std::string& msg);

inline void log_warn(const std::string& m) { log_msg(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_msg(LogLevel::debug, m); }

}  // namespace spectra
