#include "pmcmc/csmc.hpp"
#include "pmcmc/marginal.hpp"

namespace pmcmc {

TerminalSelection parse_terminal_selection(const std::string& s) {
  if (s == "standard") return TerminalSelection::kStandardCategorical;
  if (s == "forced-move") return TerminalSelection::kForcedMove;
  throw ConfigError("unknown terminal selection '" + s + "'");
}

std::string to_string(TerminalSelection s) {
  return s == TerminalSelection::kStandardCategorical ? "standard" : "forced-move";
}

MixtureVariant parse_mixture_variant(const std::string& s) {
  if (s == "prior") return MixtureVariant::kPriorMixture;
  if (s == "posterior") return MixtureVariant::kPosteriorMixture;
  if (s == "closed-form") return MixtureVariant::kClosedFormPriorMixture;
  throw ConfigError("unknown mixture variant '" + s + "'");
}

std::string to_string(MixtureVariant v) {
  switch (v) {
    case MixtureVariant::kPriorMixture: return "prior";
    case MixtureVariant::kPosteriorMixture: return "posterior";
    case MixtureVariant::kClosedFormPriorMixture: return "closed-form";
  }
  return "posterior";
}

}  // namespace pmcmc
