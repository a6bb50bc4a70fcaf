#include "wide/report_io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace wide {

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

namespace {

std::string json_double(double x) { return std::isfinite(x) ? format_double(x) : "null"; }

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

JsonObject& JsonObject::number(const std::string& key, double v) {
  order_.emplace_back(0, fields_.size());
  fields_.emplace_back(key, json_double(v));
  return *this;
}

JsonObject& JsonObject::integer(const std::string& key, long long v) {
  order_.emplace_back(0, fields_.size());
  fields_.emplace_back(key, std::to_string(v));
  return *this;
}

JsonObject& JsonObject::boolean(const std::string& key, bool v) {
  order_.emplace_back(0, fields_.size());
  fields_.emplace_back(key, v ? "true" : "false");
  return *this;
}

JsonObject& JsonObject::text(const std::string& key, const std::string& v) {
  order_.emplace_back(0, fields_.size());
  fields_.emplace_back(key, quote(v));
  return *this;
}

JsonObject& JsonObject::numbers(const std::string& key, std::span<const double> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + json_double(v[i]);
  order_.emplace_back(0, fields_.size());
  fields_.emplace_back(key, s + "]");
  return *this;
}

JsonObject& JsonObject::object(const std::string& key, const JsonObject& v) {
  order_.emplace_back(1, children_.size());
  children_.emplace_back(key, v);
  return *this;
}

JsonObject& JsonObject::objects(const std::string& key, const std::vector<JsonObject>& v) {
  order_.emplace_back(2, lists_.size());
  lists_.emplace_back(key, v);
  return *this;
}

std::string JsonObject::dump(int indent) const {
  const std::string pad(indent + 2, ' ');
  const std::string close(indent, ' ');
  if (order_.empty()) return "{}";
  std::string out = "{\n";
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const auto [kind, idx] = order_[i];
    if (kind == 0) {
      out += pad + quote(fields_[idx].first) + ": " + fields_[idx].second;
    } else if (kind == 1) {
      out += pad + quote(children_[idx].first) + ": " + children_[idx].second.dump(indent + 2);
    } else {
      const auto& list = lists_[idx].second;
      out += pad + quote(lists_[idx].first) + ": [";
      for (std::size_t j = 0; j < list.size(); ++j)
        out += std::string(j ? "," : "") + "\n" + pad + "  " + list[j].dump(indent + 4);
      out += list.empty() ? "]" : "\n" + pad + "]";
    }
    out += i + 1 < order_.size() ? ",\n" : "\n";
  }
  return out + close + "}";
}

JsonObject params_json(const WideParams& params, double tau, int steps) {
  JsonObject o;
  o.number("epsilon", params.epsilon)
      .number("sigma", params.sigma)
      .number("nu", params.nu)
      .number("T", params.horizon)
      .number("tau", tau)
      .integer("N", steps)
      .text("quadrature", to_string(params.quadrature))
      .boolean("convection", params.convection);
  return o;
}

JsonObject minimize_json(const MinimizeReport& r, bool wall_time) {
  JsonObject o;
  o.integer("iters", r.iterations)
      .integer("evaluations", r.evaluations)
      .number("total", r.breakdown.total)
      .number("inertia", r.breakdown.inertia)
      .number("stabilization", r.breakdown.stabilization)
      .number("dissipation", r.breakdown.dissipation)
      .number("initial_total", r.initial_total)
      .number("grad_norm", r.grad_norm)
      .boolean("converged", r.converged)
      .text("status", r.status)
      .number("seconds", wall_time ? r.seconds : 0.0);
  return o;
}

JsonObject el_json(const ELReport& r) {
  JsonObject o;
  o.number("weak_max", r.weak_max)
      .number("strong_norm", r.strong_norm)
      .number("kernel_gap", r.kernel_gap)
      .number("s", r.s)
      .number("buffer", r.buffer)
      .numbers("weak_residuals", r.weak_residuals)
      .number("kernel_relative_gap", r.kernel_relative_gap)
      .number("fg_l1_dual", r.fg_l1_dual)
      .number("v_l2_dual", r.v_l2_dual)
      .number("kernel_l1", r.kernel_l1)
      .number("kernel_l2", r.kernel_l2);
  return o;
}

JsonObject apriori_json(const AprioriBounds& b) {
  JsonObject o;
  o.number("eps_dt2", b.eps_dt2)
      .number("eps_conv2", b.eps_conv2)
      .number("dt_dual", b.dt_dual)
      .number("conv_dual", b.conv_dual)
      .number("eps_dt2_ratio", b.eps_dt2_ratio)
      .number("eps_conv2_ratio", b.eps_conv2_ratio)
      .number("dt_dual_ratio", b.dt_dual_ratio)
      .number("conv_dual_ratio", b.conv_dual_ratio)
      .number("conv_shape", b.conv_shape)
      .number("s", b.s);
  return o;
}

JsonObject energy_summary_json(const EnergyReport& r) {
  JsonObject o;
  o.number("rhs", r.rhs)
      .number("tol", r.tol)
      .number("probe_fraction", r.probe_fraction)
      .number("max_unif_ratio", r.max_unif_ratio)
      .number("max_ei_deviation", r.max_ei_deviation)
      .boolean("violation", r.violation);
  return o;
}

JsonObject certificate_json(const SigmaCertificate& c) {
  JsonObject o;
  o.number("c", c.c).boolean("valid", c.valid);
  return o;
}

std::string energy_csv(const EnergyReport& r) {
  std::string out = "t,energy,dissipation,lhs_unif,lhs_ei,slack_unif,slack_ei\n";
  for (std::size_t n = 0; n < r.times.size(); ++n)
    out += fmt::format("{},{},{},{},{},{},{}\n", format_double(r.times[n]), format_double(r.energy[n]),
                       format_double(r.dissipation[n]), format_double(r.lhs_unif[n]), format_double(r.lhs_ei[n]),
                       format_double(r.slack_unif[n]), format_double(r.slack_ei[n]));
  return out;
}

std::string sweep_csv(const SweepReport& r) {
  std::string out = "eps,dist_L2H1,dist_CL2,total,inertia,stab,diss,eps_dt2,eps_conv2,strong_res\n";
  for (const auto& e : r.entries)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", format_double(e.epsilon), format_double(e.distance.l2h1),
                       format_double(e.distance.cl2), format_double(e.breakdown.total),
                       format_double(e.breakdown.inertia), format_double(e.breakdown.stabilization),
                       format_double(e.breakdown.dissipation), format_double(e.apriori.eps_dt2),
                       format_double(e.apriori.eps_conv2), format_double(e.strong_res));
  return out;
}

namespace {

JsonObject entry_json(const SweepEntry& e, bool wall_time) {
  JsonObject o;
  o.number("eps", e.epsilon)
      .number("sigma", e.sigma)
      .number("dist_L2H1", e.distance.l2h1)
      .number("dist_CL2", e.distance.cl2)
      .number("total", e.breakdown.total)
      .number("inertia", e.breakdown.inertia)
      .number("stab", e.breakdown.stabilization)
      .number("diss", e.breakdown.dissipation)
      .number("strong_res", e.strong_res)
      .number("kernel_gap", e.kernel_gap)
      .number("grad_norm", e.grad_norm)
      .integer("iters", e.iterations)
      .boolean("converged", e.converged)
      .boolean("energy_violation", e.energy_violation)
      .number("energy_max_ratio", e.energy_max_ratio)
      .number("seconds", wall_time ? e.seconds : 0.0)
      .object("apriori", apriori_json(e.apriori));
  return o;
}

}  // namespace

JsonObject sweep_json(const SweepReport& r, bool wall_time) {
  std::vector<JsonObject> entries, sigma;
  for (const auto& e : r.entries) entries.push_back(entry_json(e, wall_time));
  for (const auto& e : r.sigma_entries) sigma.push_back(entry_json(e, wall_time));
  JsonObject o;
  o.boolean("partial", r.partial)
      .numbers("failed_eps", r.failed_eps)
      .boolean("trend_ok", r.trend_ok)
      .numbers("ratios", r.ratios)
      .number("sigma_gap_small", r.sigma_gap_small)
      .number("sigma_gap_large", r.sigma_gap_large)
      .number("eps_span", r.eps_span)
      .objects("entries", entries)
      .objects("sigma_entries", sigma);
  return o;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << text;
  os.flush();
  if (!os) throw ConfigError("write to " + path + " failed");
}

}  // namespace wide
