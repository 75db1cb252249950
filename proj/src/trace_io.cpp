#include "itrust/trace_io.hpp"

#include <fmt/format.h>

#include <cmath>

namespace itrust {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

nlohmann::json to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

namespace {

// JSON has no NaN; non-finite values are written as null.
nlohmann::json real_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

void write_ecim_csv(const EcimTrace& trace, std::ostream& out) {
  out << "k,beta_k,energy,gm_norm,best_energy\n";
  const std::vector<double> best = trace.best_energy_history();
  const std::size_t steps = trace.betas.size();
  for (std::size_t k = 0; k < trace.energies.size(); ++k) {
    if (k < steps) {
      out << k << ',' << format_real(trace.betas[k]) << ',' << format_real(trace.energies[k])
          << ',' << format_real(trace.gm_norms[k]) << ',' << format_real(best[k]) << '\n';
    } else {
      out << k << ",," << format_real(trace.energies[k]) << ",," << format_real(best[k]) << '\n';
    }
  }
}

nlohmann::json ecim_trace_json(const EcimTrace& trace) {
  nlohmann::json j;
  nlohmann::json iterates = nlohmann::json::array();
  for (const auto& s : trace.iterates) iterates.push_back(to_json(s));
  j["iterates"] = std::move(iterates);
  j["energies"] = trace.energies;
  j["betas"] = trace.betas;
  j["gm_norms"] = trace.gm_norms;
  j["best_energy"] = trace.best_energy;
  j["best_index"] = trace.best_index;
  j["best_iterate"] = to_json(trace.best_iterate);
  j["averaged_iterate"] = to_json(trace.averaged_iterate);
  j["initial_projected"] = trace.initial_projected;
  return j;
}

void write_trust_region_csv(const TrustRegionTrace& trace, std::ostream& out) {
  out << "t,delta,rho,model_value,f,grad_norm,step_norm,accepted,status\n";
  for (const auto& r : trace.records) {
    out << r.t << ',' << format_real(r.delta) << ',' << format_real(r.rho) << ','
        << format_real(r.model_value) << ',' << format_real(r.f) << ','
        << format_real(r.grad_norm) << ',' << format_real(r.step_norm) << ','
        << (r.accepted ? 1 : 0) << ',' << to_string(r.status) << '\n';
  }
}

nlohmann::json trust_region_json(const TrustRegionTrace& trace) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.records) {
    records.push_back({{"t", r.t},
                       {"theta", to_json(r.theta)},
                       {"delta", r.delta},
                       {"rho", real_or_null(r.rho)},
                       {"step", to_json(r.step)},
                       {"model_value", r.model_value},
                       {"f", r.f},
                       {"grad_norm", r.grad_norm},
                       {"step_norm", r.step_norm},
                       {"accepted", r.accepted},
                       {"status", to_string(r.status)}});
  }
  return {{"records", std::move(records)},
          {"final_theta", to_json(trace.final_theta)},
          {"final_f", trace.final_f},
          {"final_grad_norm", trace.final_grad_norm},
          {"converged", trace.converged},
          {"accepted_steps", trace.accepted_steps}};
}

}  // namespace itrust
