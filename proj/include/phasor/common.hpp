#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace phasor {

// All recoverable failures (shape errors, parse errors, contract violations)
// throw Error; the CLI maps it to exit code 1 (usage/validation) or 2
// (runtime/numeric), see tools/main.cpp.
class Error : public std::runtime_error {
 public:
  enum class Kind { validation, numeric };
  Error(std::string msg, Kind kind = Kind::validation)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {
inline void format_into(std::ostringstream&) {}
template <class T, class... Rest>
void format_into(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  format_into(os, rest...);
}
}  // namespace detail

template <class... Args>
std::string strcat_all(const Args&... args) {
  std::ostringstream os;
  detail::format_into(os, args...);
  return os.str();
}

template <class... Args>
[[noreturn]] void fail(const Args&... args) {
  throw Error(strcat_all(args...));
}

template <class... Args>
[[noreturn]] void fail_numeric(const Args&... args) {
  throw Error(strcat_all(args...), Error::Kind::numeric);
}

#define PHASOR_CHECK(cond, ...)          \
  do {                                   \
    if (!(cond)) ::phasor::fail(__VA_ARGS__); \
  } while (0)

}  // namespace phasor
