#pragma once

// CSV and JSON export of solver traces. CSV columns are part of the CLI
// contract; do not reorder.

#include "itrust/ecim.hpp"
#include "itrust/trust_region.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace itrust {

/// Shortest round-trip representation ("nan" / "inf" for non-finite values).
std::string format_real(double x);

nlohmann::json to_json(const Vector& v);

/// Columns: k,beta_k,energy,gm_norm,best_energy. Row K carries the final
/// energy with empty beta_k and gm_norm.
void write_ecim_csv(const EcimTrace& trace, std::ostream& out);
nlohmann::json ecim_trace_json(const EcimTrace& trace);

/// Columns: t,delta,rho,model_value,f,grad_norm,step_norm,accepted,status
void write_trust_region_csv(const TrustRegionTrace& trace, std::ostream& out);
nlohmann::json trust_region_json(const TrustRegionTrace& trace);

}  // namespace itrust
