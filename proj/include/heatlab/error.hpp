#pragma once

#include <stdexcept>
#include <string>

namespace heatlab {

/// Failure categories. The CLI maps every one of these to exit code 2.
enum class Errc {
  invalid_parameter,
  ball_escapes_graph,
  domain,
  unreachable,
  degenerate_chain,
  resolution,
  runaway,
  insufficient_data,
  underdetermined,
  io,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::ball_escapes_graph: return "ball-escapes-graph";
    case Errc::domain: return "domain";
    case Errc::unreachable: return "unreachable";
    case Errc::degenerate_chain: return "degenerate-chain";
    case Errc::resolution: return "resolution";
    case Errc::runaway: return "runaway";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::underdetermined: return "underdetermined";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace heatlab
