#include "hypermerw/serialize.hpp"

#include <fstream>
#include <sstream>

#include "hypermerw/error.hpp"

namespace hypermerw {

using json = nlohmann::json;

namespace {

json one_based(std::span<const NodeId> nodes) {
  json a = json::array();
  for (auto v : nodes) a.push_back(v + 1);
  return a;
}

NodeSet zero_based(const json& a, std::size_t n) {
  NodeSet out;
  for (const auto& x : a) {
    auto v = x.get<long long>();
    if (v < 1 || static_cast<std::size_t>(v) > n) throw InvalidInput("node index out of range in kernel document");
    out.push_back(static_cast<NodeId>(v - 1));
  }
  return out;
}

json weights_to_json(const LayerWeights& w) {
  json o = json::object();
  for (const auto& [k, x] : w) o[std::to_string(k)] = x;
  return o;
}

LayerWeights weights_from_json(const json& o) {
  LayerWeights w;
  for (const auto& [k, x] : o.items()) w[std::stoi(k)] = x.get<double>();
  return w;
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& ex) {
    throw InvalidInput(std::string("malformed kernel document: ") + ex.what());
  }
}

}  // namespace

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const json& doc) {
  return guarded([&] {
    const json& a = doc.is_object() ? doc.at("p") : doc;
    if (!a.is_array() || a.empty()) throw InvalidInput("expected a non-empty array of numbers");
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
  });
}

json to_json(const BroadcastKernel& kernel) {
  json doc;
  doc["type"] = "broadcast";
  doc["n"] = kernel.stationary.size();
  doc["weights"] = weights_to_json(kernel.weights);
  doc["stationary"] = vector_to_json(kernel.stationary);
  if (kernel.source.size() == kernel.stationary.size() && kernel.source != kernel.stationary)
    doc["source"] = vector_to_json(kernel.source);
  doc["potentials"] = {{"u", vector_to_json(kernel.u)}, {"v", vector_to_json(kernel.v)}};
  doc["residuals"] = {{"row", kernel.row_residual},
                      {"stationarity", kernel.stationarity_residual},
                      {"iterations", kernel.trace.iterations},
                      {"converged", kernel.trace.converged}};
  json layers = json::array();
  for (const auto& [k, t] : kernel.layers) {
    json entries = json::array();
    for (std::size_t i = 0; i < t.size(); ++i)
      entries.push_back({{"pivot", t.distinguished(i) + 1}, {"receivers", one_based(t.group(i))}, {"value", t.value(i)}});
    layers.push_back({{"k", k}, {"loops", t.loops() == Loops::Allow}, {"entries", std::move(entries)}});
  }
  doc["layers"] = std::move(layers);
  return doc;
}

json to_json(const MergeKernel& kernel) {
  json doc;
  doc["type"] = "merge";
  doc["n"] = kernel.stationary.size();
  doc["weights"] = weights_to_json(kernel.weights);
  doc["stationary"] = vector_to_json(kernel.stationary);
  doc["coverage"] = kernel.coverage;
  doc["residuals"] = {{"context", kernel.context_residual},
                      {"stationarity", kernel.stationarity_residual},
                      {"iterations", kernel.trace.iterations},
                      {"converged", kernel.trace.converged}};
  json layers = json::array();
  for (const auto& [k, t] : kernel.layers) {
    json entries = json::array();
    for (std::size_t i = 0; i < t.size(); ++i)
      entries.push_back({{"tail", one_based(t.group(i))}, {"receiver", t.distinguished(i) + 1}, {"value", t.value(i)}});
    layers.push_back({{"k", k}, {"loops", t.loops() == Loops::Allow}, {"entries", std::move(entries)}});
  }
  doc["layers"] = std::move(layers);
  json pots = json::array();
  for (const auto& [k, pot] : kernel.potentials) {
    json contexts = json::array();
    for (const auto& [tail, x] : pot.u) contexts.push_back({{"tail", one_based(tail)}, {"value", x}});
    pots.push_back({{"k", k}, {"contexts", std::move(contexts)}, {"v", vector_to_json(pot.v)}});
  }
  doc["potentials"] = std::move(pots);
  return doc;
}

KernelKind kernel_kind(const json& doc) {
  const auto type = doc.is_object() ? doc.value("type", std::string{}) : std::string{};
  if (type == "broadcast") return KernelKind::Broadcast;
  if (type == "merge") return KernelKind::Merge;
  throw InvalidInput("kernel document needs \"type\": \"broadcast\" or \"merge\"");
}

BroadcastKernel broadcast_kernel_from_json(const json& doc) {
  return guarded([&] {
    if (kernel_kind(doc) != KernelKind::Broadcast) throw InvalidInput("not a broadcast kernel");
    BroadcastKernel k;
    const auto n = doc.at("n").get<std::size_t>();
    k.weights = weights_from_json(doc.at("weights"));
    k.stationary = vector_from_json(doc.at("stationary"));
    k.source = doc.contains("source") ? vector_from_json(doc.at("source")) : k.stationary;
    k.u = vector_from_json(doc.at("potentials").at("u"));
    k.v = vector_from_json(doc.at("potentials").at("v"));
    const auto& r = doc.at("residuals");
    k.row_residual = r.at("row").get<double>();
    k.stationarity_residual = r.at("stationarity").get<double>();
    k.trace.iterations = r.at("iterations").get<long>();
    k.trace.converged = r.at("converged").get<bool>();
    for (const auto& layer : doc.at("layers")) {
      const int order = layer.at("k").get<int>();
      std::vector<SymSparseTensor::Entry> es;
      for (const auto& e : layer.at("entries"))
        es.push_back({{zero_based(json::array({e.at("pivot")}), n).front(), zero_based(e.at("receivers"), n)},
                      e.at("value").get<double>()});
      const Loops loops = layer.value("loops", false) ? Loops::Allow : Loops::Forbid;
      k.layers.emplace(order, SymSparseTensor(order, n, Symmetry::Front, std::move(es), loops));
    }
    if (static_cast<std::size_t>(k.stationary.size()) != n) throw InvalidInput("stationary vector length differs from n");
    return k;
  });
}

MergeKernel merge_kernel_from_json(const json& doc) {
  return guarded([&] {
    if (kernel_kind(doc) != KernelKind::Merge) throw InvalidInput("not a merge kernel");
    MergeKernel k;
    const auto n = doc.at("n").get<std::size_t>();
    k.weights = weights_from_json(doc.at("weights"));
    k.stationary = vector_from_json(doc.at("stationary"));
    k.coverage = doc.value("coverage", 1.0);
    const auto& r = doc.at("residuals");
    k.context_residual = r.at("context").get<double>();
    k.stationarity_residual = r.at("stationarity").get<double>();
    k.trace.iterations = r.at("iterations").get<long>();
    k.trace.converged = r.at("converged").get<bool>();
    for (const auto& layer : doc.at("layers")) {
      const int order = layer.at("k").get<int>();
      std::vector<SymSparseTensor::Entry> es;
      for (const auto& e : layer.at("entries"))
        es.push_back({{zero_based(json::array({e.at("receiver")}), n).front(), zero_based(e.at("tail"), n)},
                      e.at("value").get<double>()});
      const Loops loops = layer.value("loops", false) ? Loops::Allow : Loops::Forbid;
      k.layers.emplace(order, SymSparseTensor(order, n, Symmetry::Back, std::move(es), loops));
    }
    if (doc.contains("potentials"))
      for (const auto& pot : doc.at("potentials")) {
        LayerPotentials lp;
        for (const auto& c : pot.at("contexts")) lp.u[zero_based(c.at("tail"), n)] = c.at("value").get<double>();
        lp.v = vector_from_json(pot.at("v"));
        k.potentials.emplace(pot.at("k").get<int>(), std::move(lp));
      }
    if (static_cast<std::size_t>(k.stationary.size()) != n) throw InvalidInput("stationary vector length differs from n");
    return k;
  });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace hypermerw
