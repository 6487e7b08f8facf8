#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "siren/network.hpp"

namespace siren {

using nlohmann::json;

std::string network_to_json(const SirenNet& net) {
  json doc;
  doc["format"] = "siren-net";
  doc["version"] = 1;
  std::vector<std::size_t> dims{net.input_dim()};
  for (const auto& l : net.layers()) dims.push_back(l.fan_out());
  doc["dims"] = dims;
  doc["scheme"] = {{"name", scheme_name(net.scheme)},
                   {"on_curve", net.scheme.kind == SchemeKind::CustomOnCurve},
                   {"c_w", net.scheme.c_w},
                   {"c_b", net.scheme.c_b}};
  doc["omega0"] = net.omega0;
  doc["seed"] = net.seed;
  json layers = json::array();
  for (const auto& l : net.layers()) {
    layers.push_back({{"weight", l.weight.values()}, {"bias", l.bias}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump();
}

SirenNet network_from_json(std::string_view text) {
  const json doc = json::parse(text);
  if (doc.value("format", "") != "siren-net") {
    throw std::invalid_argument("not a siren-net document");
  }
  const auto dims = doc.at("dims").get<std::vector<std::size_t>>();
  const auto& layers_doc = doc.at("layers");
  if (dims.size() < 2 || layers_doc.size() + 1 != dims.size()) {
    throw std::invalid_argument("siren-net: dims and layers disagree");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < layers_doc.size(); ++i) {
    auto w = layers_doc[i].at("weight").get<std::vector<double>>();
    auto b = layers_doc[i].at("bias").get<std::vector<double>>();
    layers.push_back({Matrix(dims[i + 1], dims[i], std::move(w)), std::move(b)});
  }
  SirenNet net(std::move(layers));
  const auto& s = doc.at("scheme");
  const auto name = s.at("name").get<std::string>();
  if (name == "custom") {
    const double cw = s.at("c_w").get<double>();
    net.scheme = s.value("on_curve", false) ? InitScheme::on_curve(cw)
                                            : InitScheme::custom(cw, s.at("c_b").get<double>());
  } else {
    net.scheme = parse_scheme(name);
  }
  net.omega0 = doc.at("omega0").get<double>();
  net.seed = doc.at("seed").get<std::uint64_t>();
  return net;
}

void save_network(const SirenNet& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << network_to_json(net) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

SirenNet load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return network_from_json(buf.str());
}

}  // namespace siren
