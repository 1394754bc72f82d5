#include "rmtldp/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace rmtldp::io {

namespace {

constexpr int kDefaultNodes = 128;
constexpr double kMassSlack = 1e-9;

double number(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
  }
  throw FormatError(what + ": expected a number");
}

double field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(where + ": missing \"" + key + "\"");
  return number(j.at(key), where + "." + key);
}

std::vector<double> number_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

std::string kind_name(DensityKind k) {
  switch (k) {
    case DensityKind::semicircle:
      return "semicircle";
    case DensityKind::uniform:
      return "uniform";
    case DensityKind::table:
      return "table";
  }
  return "table";
}

DensityKind kind_from_name(const std::string& s) {
  if (s == "semicircle") return DensityKind::semicircle;
  if (s == "uniform") return DensityKind::uniform;
  if (s == "table") return DensityKind::table;
  throw FormatError("density.kind: unknown kind \"" + s + "\"");
}

json part_to_json(const DensityPart& p) {
  json params;
  switch (p.kind) {
    case DensityKind::semicircle:
      params = {{"center", p.params.center}, {"radius", p.params.radius}};
      break;
    case DensityKind::uniform:
      params = {{"a", p.params.a}, {"b", p.params.b}};
      break;
    case DensityKind::table:
      params = {{"x", p.params.table_x}, {"density", p.params.table_density}};
      break;
  }
  return {{"kind", kind_name(p.kind)},
          {"params", params},
          {"support", {p.support.lo, p.support.hi}},
          {"nodes", p.node_count},
          {"scale", p.scale},
          {"left_edge_integrable", p.left_edge_integrable},
          {"right_edge_integrable", p.right_edge_integrable}};
}

struct PartInput {
  DensityKind kind;
  DensityParams params;
  Interval support;
  int nodes;
  bool left;
  bool right;
  std::optional<double> scale;
  std::optional<double> mass;
};

PartInput part_from_json(const json& j) {
  const std::string where = "density";
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw FormatError(where + ": missing \"kind\"");
  }
  PartInput in{};
  in.kind = kind_from_name(j.at("kind").get<std::string>());
  const json params = j.value("params", json::object());
  switch (in.kind) {
    case DensityKind::semicircle:
      in.params.center = field(params, "center", where + ".params");
      in.params.radius = field(params, "radius", where + ".params");
      in.support = {in.params.center - in.params.radius, in.params.center + in.params.radius};
      in.left = in.right = true;
      break;
    case DensityKind::uniform:
      in.params.a = field(params, "a", where + ".params");
      in.params.b = field(params, "b", where + ".params");
      in.support = {in.params.a, in.params.b};
      in.left = in.right = false;
      break;
    case DensityKind::table:
      if (!params.contains("x") || !params.contains("density")) {
        throw FormatError(where + ".params: table needs \"x\" and \"density\"");
      }
      in.params.table_x = number_list(params.at("x"), where + ".params.x");
      in.params.table_density = number_list(params.at("density"), where + ".params.density");
      if (in.params.table_x.size() < 2 ||
          in.params.table_x.size() != in.params.table_density.size()) {
        throw FormatError(where + ".params: table x and density must match, length >= 2");
      }
      in.support = {in.params.table_x.front(), in.params.table_x.back()};
      in.left = in.right = false;
      break;
  }
  if (j.contains("support")) {
    const auto s = number_list(j.at("support"), where + ".support");
    if (s.size() != 2) throw FormatError(where + ".support: expected [lo, hi]");
    in.support = {s[0], s[1]};
  }
  in.nodes = j.value("nodes", kDefaultNodes);
  in.left = j.value("left_edge_integrable", in.left);
  in.right = j.value("right_edge_integrable", in.right);
  if (j.contains("scale")) in.scale = number(j.at("scale"), where + ".scale");
  if (j.contains("mass")) in.mass = number(j.at("mass"), where + ".mass");
  return in;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

json extended_to_json(const ExtendedReal& v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}

ExtendedReal extended_from_json(const json& j) {
  const double v = number(j, "value");
  if (std::isinf(v)) {
    if (v < 0) throw FormatError("value: -inf is not an extended real");
    return ExtendedReal::infinity();
  }
  return v;
}

json measure_to_json(const SpectralMeasure& m) {
  json atoms = json::array();
  for (const auto& a : m.atoms()) atoms.push_back({a.location, a.weight});
  json density;
  if (m.parts().size() == 1) {
    density = part_to_json(m.parts().front());
  } else if (!m.parts().empty()) {
    density = json::array();
    for (const auto& p : m.parts()) density.push_back(part_to_json(p));
  }
  return {{"atoms", atoms}, {"density", density}};
}

SpectralMeasure measure_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("measure: expected an object");
  std::vector<Atom> atoms;
  double atom_mass = 0.0;
  if (j.contains("atoms") && !j.at("atoms").is_null()) {
    if (!j.at("atoms").is_array()) throw FormatError("measure.atoms: expected an array");
    for (const auto& a : j.at("atoms")) {
      const auto pair = number_list(a, "measure.atoms");
      if (pair.size() != 2) throw FormatError("measure.atoms: expected [location, weight]");
      atoms.push_back({pair[0], pair[1]});
      atom_mass += pair[1];
    }
  }
  std::vector<PartInput> inputs;
  if (j.contains("density") && !j.at("density").is_null()) {
    const auto& d = j.at("density");
    if (d.is_array()) {
      for (const auto& p : d) inputs.push_back(part_from_json(p));
    } else {
      inputs.push_back(part_from_json(d));
    }
  }
  if (atoms.empty() && inputs.empty()) throw FormatError("measure: no atoms and no density");

  // Parts without scale or mass share the mass the others leave.
  double claimed = atom_mass;
  std::size_t open = 0;
  std::vector<DensityPart> parts;
  parts.reserve(inputs.size());
  for (const auto& in : inputs) {
    const double shape_mass = SpectralMeasure::make_part(in.kind, in.params, in.support, 1.0,
                                                         in.nodes, in.left, in.right)
                                  .mass;
    if (in.scale) {
      claimed += *in.scale * shape_mass;
    } else if (in.mass) {
      claimed += *in.mass;
    } else {
      ++open;
    }
  }
  const double share = open > 0 ? (1.0 - claimed) / static_cast<double>(open) : 0.0;
  if (open > 0 && !(share > 0)) throw FormatError("measure: no mass left for the density");
  for (const auto& in : inputs) {
    double scale = 0.0;
    if (in.scale) {
      scale = *in.scale;
    } else {
      const double shape_mass = SpectralMeasure::make_part(in.kind, in.params, in.support, 1.0,
                                                           in.nodes, in.left, in.right)
                                    .mass;
      if (!(shape_mass > 0)) throw FormatError("density: zero mass on its support");
      scale = (in.mass ? *in.mass : share) / shape_mass;
    }
    parts.push_back(SpectralMeasure::make_part(in.kind, in.params, in.support, scale, in.nodes,
                                               in.left, in.right));
  }
  // Absorb rounding in the reconstructed weights; scales stay as given.
  double total = atom_mass;
  for (const auto& p : parts) total += p.mass;
  if (std::abs(total - 1.0) > kMassSlack) {
    throw FormatError("measure: total mass " + format_number(total) + " is not 1");
  }
  if (!parts.empty()) {
    const double factor = (1.0 - atom_mass) / (total - atom_mass);
    for (auto& p : parts) {
      for (auto& w : p.weights) w *= factor;
      for (auto& c : p.cell_mass) c *= factor;
      p.mass *= factor;
    }
  }
  try {
    return SpectralMeasure::compose(std::move(atoms), std::move(parts));
  } catch (const DomainError& e) {
    throw FormatError(std::string("measure: ") + e.what());
  }
}

json model_to_json(const Model& m) {
  if (const auto* c = std::get_if<CovarianceModel>(&m)) {
    return {{"kind", "covariance"},
            {"alpha", c->alpha()},
            {"beta", c->beta()},
            {"entry_law", to_string(c->entry_law())},
            {"rho", measure_to_json(c->rho())}};
  }
  const auto& w = std::get<DeformedWignerModel>(m);
  return {{"kind", "deformed-wigner"},
          {"beta", w.beta()},
          {"entry_law", to_string(w.entry_law())},
          {"deformation", measure_to_json(w.mu_d())}};
}

Model model_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("model: expected an object");
  const std::string kind = j.value("kind", std::string("covariance"));
  if (!j.contains("beta") || !j.at("beta").is_number_integer()) {
    throw FormatError("model: \"beta\" must be 1 or 2");
  }
  const int beta = j.at("beta").get<int>();
  try {
    if (kind == "covariance") {
      const double alpha = field(j, "alpha", "model");
      if (!j.contains("rho")) throw FormatError("model: missing \"rho\"");
      auto rho = measure_from_json(j.at("rho"));
      if (j.contains("entry_law")) {
        return CovarianceModel(std::move(rho), alpha, beta,
                               entry_law_from_string(j.at("entry_law").get<std::string>()));
      }
      return CovarianceModel(std::move(rho), alpha, beta);
    }
    if (kind == "deformed-wigner") {
      if (!j.contains("deformation")) throw FormatError("model: missing \"deformation\"");
      auto mu = measure_from_json(j.at("deformation"));
      if (j.contains("entry_law")) {
        return DeformedWignerModel(std::move(mu), beta,
                                   entry_law_from_string(j.at("entry_law").get<std::string>()));
      }
      return DeformedWignerModel(std::move(mu), beta);
    }
  } catch (const FormatError&) {
    throw;
  } catch (const DomainError& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  throw FormatError("model: unknown kind \"" + kind + "\"");
}

Model read_model(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return model_from_json(j);
}

json edge_to_json(const EdgeData& e) {
  json out;
  out["theta_max"] = extended_to_json(e.theta_max);
  out["x_c"] = e.x_c ? extended_to_json(*e.x_c) : json(nullptr);
  out["theta_c"] = e.theta_c ? json(*e.theta_c) : json(nullptr);
  out["r_sigma"] = e.r_sigma ? json(*e.r_sigma) : json(nullptr);
  out["degenerate"] = e.degenerate;
  out["case_tag"] = e.case_tag ? json(to_string(*e.case_tag)) : json(nullptr);
  return out;
}

json dw_edge_to_json(const DWEdgeData& e) {
  return {{"y_c", e.y_c},
          {"r_edge", e.r_edge},
          {"x_c", extended_to_json(e.x_c_dw)},
          {"g_edge_mu_d", extended_to_json(e.g_edge_mu_d)}};
}

std::string rate_table_csv(const std::vector<double>& x, const std::vector<double>& g,
                           const std::vector<double>& gbar, const std::vector<double>& i) {
  std::string out = "x,G,Gbar,I\n";
  for (std::size_t k = 0; k < x.size(); ++k) {
    out += format_number(x[k]) + ',' + format_number(g[k]) + ',' + format_number(gbar[k]) + ',' +
           format_number(i[k]) + '\n';
  }
  return out;
}

std::string rate_table_csv(const RateTable& t) {
  return rate_table_csv(t.x_grid, t.g_values, t.gbar_values, t.i_values);
}

std::string approx_csv(const ApproxReport& rep) {
  std::string out = "eps,r_sigma_eps,sup_error\n";
  for (const auto& e : rep.entries) {
    out += format_number(e.eps_used) + ',' + format_number(e.r_sigma_eps) + ',' +
           format_number(e.sup_error) + '\n';
  }
  return out;
}

std::string mc_csv(const std::vector<SpectrumSample>& samples) {
  std::string out = "replica,n,m,lambda_max\n";
  for (const auto& s : samples) {
    out += std::to_string(s.replica_index) + ',' + std::to_string(s.n) + ',' +
           std::to_string(s.m) + ',' + format_number(s.lambda_max) + '\n';
  }
  return out;
}

std::string spectra_binary(const std::vector<SpectrumSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    for (double v : s.eigenvalues) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
      out.append(bytes, 8);
    }
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace rmtldp::io
