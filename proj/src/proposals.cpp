#include "pmcmc/proposals.hpp"

#include <stdexcept>

namespace pmcmc {

GridProposal::GridProposal(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("grid proposal: no rows");
  for (const auto& r : rows_) {
    if (r.size() != rows_.size()) throw ConfigError("grid proposal: matrix must be square");
    validate_simplex(r, 1e-12);
  }
}

}  // namespace pmcmc
