#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace econsim {

/// Per-period fraction, e.g. 0.03 for 3% per model year.
using Rate = double;
/// Model currency units.
using Money = double;

using AgentId = std::uint64_t;

enum class IndividualKind { ramsey, olg };
enum class BankKind { non_profit, commercial };
enum class FirmKind { perfect, monopoly, oligopoly, monopolistic };
enum class GovKind { fiscal, central_bank, pension };

/// One step is one model year.
struct EpisodeClock {
  int t = 0;
  int horizon = 300;

  bool at_horizon() const noexcept { return t >= horizon; }
};

/// Raised when a configuration cannot be turned into a runnable economy.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a joint action is malformed; the snapshot is left untouched.
class ActionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Production with zero capital or zero labor has no factor prices.
class DegenerateMarket : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::string_view to_string(IndividualKind k) {
  return k == IndividualKind::olg ? "olg" : "ramsey";
}

constexpr std::string_view to_string(BankKind k) {
  return k == BankKind::commercial ? "commercial" : "non-profit";
}

constexpr std::string_view to_string(FirmKind k) {
  switch (k) {
    case FirmKind::perfect: return "perfect";
    case FirmKind::monopoly: return "monopoly";
    case FirmKind::oligopoly: return "oligopoly";
    case FirmKind::monopolistic: return "monopolistic";
  }
  return "?";
}

constexpr std::string_view to_string(GovKind k) {
  switch (k) {
    case GovKind::fiscal: return "fiscal";
    case GovKind::central_bank: return "central-bank";
    case GovKind::pension: return "pension";
  }
  return "?";
}

constexpr bool is_strategic(FirmKind k) { return k != FirmKind::perfect; }

}  // namespace econsim
