#include "siren/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace siren {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("Table::add_row: wrong column count");
  rows.push_back(std::move(row));
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

// JSON has no inf/nan; store them as strings.
json jnum(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

json vec(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

json fit(const LinearFit& f) { return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}}; }

}  // namespace

std::string Table::to_csv() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << csv_field(cells[i]);
    }
    out << '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out.str();
}

void Table::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_csv();
  if (!f) throw std::runtime_error("write failed for " + path);
}

Table to_table(const VarianceProfile& p) {
  Table t{{"scheme", "N", "L", "layer", "preact_std", "preact_se", "jac_scaled_std", "jac_se"}, {}};
  for (const auto& s : p.layers) {
    t.add_row({scheme_name(p.scheme), num(p.dims.width), num(p.dims.depth), num(s.layer),
               num(s.preact_std), num(s.preact_se), num(s.jac_scaled_std), num(s.jac_se)});
  }
  return t;
}

Table to_table(const GradientDepthScan& scan) {
  Table t{{"scheme", "N", "L", "layer", "input_grad_std", "param_grad_var"}, {}};
  for (const auto& r : scan.rows) {
    for (std::size_t l = 0; l < r.param_grad_var.size(); ++l) {
      t.add_row({scheme_name(scan.scheme), num(scan.dims.width), num(r.depth), num(l + 1),
                 num(r.input_grad_std), num(r.param_grad_var[l])});
    }
  }
  return t;
}

Table to_table(const NtkTraceScan& scan) {
  Table t{{"scheme", "N", "L", "normalized_trace", "trace_se", "growth"}, {}};
  for (const auto& r : scan.rows) {
    t.add_row({scheme_name(scan.scheme), num(scan.dims.width), num(r.depth), num(r.normalized_trace),
               num(r.trace_se), growth_law_name(scan.growth.law)});
  }
  return t;
}

Table to_table(const SpectrumReport& s) {
  Table t{{"bin", "frequency", "magnitude", "above_cutoff"}, {}};
  for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
    t.add_row({num(k), num(s.frequencies[k]), num(s.magnitudes[k]), k > s.cutoff_bin ? "1" : "0"});
  }
  return t;
}

Table to_table(const OverlapMap& o) {
  Table t{{"eigen_index", "frequency", "power"}, {}};
  for (std::size_t i = 0; i < o.power.rows(); ++i) {
    for (std::size_t k = 0; k < o.power.cols(); ++k) {
      t.add_row({num(i), num(o.frequencies[k]), num(o.power(i, k))});
    }
  }
  return t;
}

Table to_table(const SingularSpectrumScan& scan) {
  Table t{{"scheme", "N", "L", "rank", "singular_value", "normalized_max"}, {}};
  for (const auto& r : scan.rows) {
    for (std::size_t k = 0; k < r.singular_values.size(); ++k) {
      t.add_row({scheme_name(scan.scheme), num(scan.dims.width), num(r.depth), num(k + 1),
                 num(r.singular_values[k]), num(r.normalized_max)});
    }
  }
  return t;
}

Table to_table(const std::vector<ExperimentReport>& reports) {
  Table t{{"task", "scheme", "L", "N", "seed", "train_mse", "test_mse", "psnr", "snr", "epochs", "lr",
           "omega0", "wall_s", "n_train", "n_test", "cutoff_energy_fraction"},
          {}};
  for (const auto& r : reports) {
    t.add_row({r.task, r.scheme, num(r.depth), num(r.width), num(static_cast<std::size_t>(r.seed)), num(r.train_mse),
               num(r.test_mse), num(r.psnr), num(r.snr), num(r.epochs), num(r.learning_rate),
               num(r.omega0), num(r.wall_seconds), num(r.n_train), num(r.n_test),
               r.cutoff_energy_fraction ? num(*r.cutoff_energy_fraction) : ""});
  }
  return t;
}

Table loss_curves(const std::vector<ExperimentReport>& reports) {
  Table t{{"task", "scheme", "L", "N", "seed", "epoch", "loss"}, {}};
  for (const auto& r : reports) {
    for (std::size_t e = 0; e < r.loss_curve.size(); ++e) {
      t.add_row({r.task, r.scheme, num(r.depth), num(r.width), num(static_cast<std::size_t>(r.seed)), num(e),
                 num(r.loss_curve[e])});
    }
  }
  return t;
}

json to_json(const InitScheme& s) {
  return {{"name", scheme_name(s)}, {"c_w", s.c_w}, {"c_b", s.c_b}};
}

json to_json(const NetworkDims& d) {
  return {{"n0", d.n0}, {"N", d.width}, {"L", d.depth}, {"omega0", d.omega0}};
}

json to_json(const VarianceProfile& p) {
  json layers = json::array();
  for (const auto& s : p.layers) {
    layers.push_back({{"layer", s.layer}, {"preact_std", s.preact_std}, {"preact_se", s.preact_se},
                      {"jac_scaled_std", s.jac_scaled_std}, {"jac_se", s.jac_se}});
  }
  return {{"scheme", to_json(p.scheme)}, {"dims", to_json(p.dims)}, {"ensembles", p.ensembles},
          {"inputs", p.inputs}, {"seed", p.seed}, {"layers", layers}};
}

json to_json(const GradientDepthScan& scan) {
  json rows = json::array();
  for (const auto& r : scan.rows) {
    rows.push_back({{"L", r.depth}, {"input_grad_std", r.input_grad_std},
                    {"param_grad_var", vec(r.param_grad_var)}});
  }
  return {{"scheme", to_json(scan.scheme)}, {"dims", to_json(scan.dims)},
          {"ensembles", scan.ensembles}, {"seed", scan.seed}, {"rows", rows},
          {"log_std_fit", fit(scan.log_std_fit)}, {"param_var_fit", fit(scan.param_var_fit)}};
}

json to_json(const NtkTraceScan& scan) {
  json rows = json::array();
  for (const auto& r : scan.rows) {
    rows.push_back({{"L", r.depth}, {"normalized_trace", r.normalized_trace}, {"trace_se", r.trace_se}});
  }
  const GrowthFit& g = scan.growth;
  return {{"scheme", to_json(scan.scheme)}, {"dims", to_json(scan.dims)},
          {"ensembles", scan.ensembles}, {"seed", scan.seed}, {"rows", rows},
          {"growth", {{"law", growth_law_name(g.law)}, {"log_fit", fit(g.log_fit)},
                      {"linear_fit", fit(g.linear_fit)}, {"plateau_change", g.plateau_change},
                      {"ratio", g.ratio}}}};
}

json to_json(const SpectrumReport& s) {
  return {{"lo", s.lo}, {"hi", s.hi}, {"omega0", s.omega0}, {"cutoff_bin", s.cutoff_bin},
          {"cutoff_energy_fraction", s.cutoff_energy_fraction}, {"signal_energy", s.signal_energy},
          {"frequencies", vec(s.frequencies)}, {"magnitudes", vec(s.magnitudes)}};
}

json to_json(const OverlapMap& o) {
  json power = json::array();
  for (std::size_t i = 0; i < o.power.rows(); ++i) {
    Vector row(o.power.row(i).begin(), o.power.row(i).end());
    power.push_back(vec(row));
  }
  return {{"omega0", o.omega0}, {"frequencies", vec(o.frequencies)}, {"power", power}};
}

json to_json(const SingularSpectrumScan& scan) {
  json rows = json::array();
  for (const auto& r : scan.rows) {
    rows.push_back({{"L", r.depth}, {"max_singular", r.max_singular},
                    {"normalized_max", r.normalized_max}, {"singular_values", vec(r.singular_values)}});
  }
  return {{"scheme", to_json(scan.scheme)}, {"dims", to_json(scan.dims)},
          {"ensembles", scan.ensembles}, {"seed", scan.seed}, {"rows", rows}};
}

json to_json(const ExperimentReport& r) {
  json j = {{"task", r.task}, {"scheme", r.scheme}, {"L", r.depth}, {"N", r.width},
            {"seed", r.seed}, {"epochs", r.epochs}, {"lr", r.learning_rate},
            {"omega0", r.omega0}, {"n_train", r.n_train}, {"n_test", r.n_test},
            {"train_mse", jnum(r.train_mse)}, {"test_mse", jnum(r.test_mse)},
            {"psnr", jnum(r.psnr)}, {"snr", jnum(r.snr)}, {"wall_s", r.wall_seconds},
            {"loss_curve", vec(r.loss_curve)}};
  if (r.cutoff_energy_fraction) j["cutoff_energy_fraction"] = *r.cutoff_energy_fraction;
  return j;
}

}  // namespace siren
