#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qipm/errors.hpp"
#include "qipm/lp_core.hpp"

namespace qipm {

using nlohmann::json;

namespace {

json to_array(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_array(const std::vector<Index>& v) {
  json out = json::array();
  for (Index i : v) out.push_back(i);
  return out;
}

VectorXd vector_field(const json& obj, const char* key) {
  const json& arr = obj.at(key);
  if (!arr.is_array()) throw MalformedInstanceError(std::string("field '") + key + "' must be an array");
  VectorXd v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw MalformedInstanceError(std::string("field '") + key + "' holds a non-number");
    }
    v[static_cast<Index>(i)] = arr[i].get<double>();
  }
  return v;
}

std::vector<Index> index_field(const json& obj, const char* key) {
  std::vector<Index> out;
  for (const auto& v : obj.at(key)) out.push_back(v.get<Index>());
  return out;
}

}  // namespace

std::string instance_to_json(const LpInstance& inst) {
  json j;
  j["name"] = inst.name;
  j["m"] = inst.m();
  j["n"] = inst.n();
  json flat = json::array();
  for (Index i = 0; i < inst.m(); ++i)
    for (Index k = 0; k < inst.n(); ++k) flat.push_back(inst.A(i, k));
  j["A"] = std::move(flat);
  j["b"] = to_array(inst.b);
  j["c"] = to_array(inst.c);
  j["integer_data"] = inst.integer_data;
  if (inst.certificate) {
    const Certificate& cert = *inst.certificate;
    j["certificate"] = {{"x_star", to_array(cert.x_star)},
                        {"y_star", to_array(cert.y_star)},
                        {"s_star", to_array(cert.s_star)},
                        {"partition_B", to_array(cert.partition_B)},
                        {"partition_N", to_array(cert.partition_N)},
                        {"opt_value", cert.opt_value},
                        {"degenerate", cert.degenerate}};
  }
  if (inst.start) {
    j["start"] = {{"y", to_array(inst.start->y)},
                  {"s", to_array(inst.start->s)},
                  {"mu", inst.start->mu}};
  }
  return j.dump(2);
}

LpInstance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedInstanceError(std::string("instance JSON does not parse: ") + e.what());
  }

  LpInstance inst;
  Index m = 0;
  Index n = 0;
  VectorXd flat;
  try {
    inst.name = j.at("name").get<std::string>();
    m = j.at("m").get<Index>();
    n = j.at("n").get<Index>();
    flat = vector_field(j, "A");
    inst.b = vector_field(j, "b");
    inst.c = vector_field(j, "c");
    inst.integer_data = j.at("integer_data").get<bool>();
    if (j.contains("certificate")) {
      const json& cj = j.at("certificate");
      Certificate cert;
      cert.x_star = vector_field(cj, "x_star");
      cert.y_star = vector_field(cj, "y_star");
      cert.s_star = vector_field(cj, "s_star");
      cert.partition_B = index_field(cj, "partition_B");
      cert.partition_N = index_field(cj, "partition_N");
      cert.opt_value = cj.at("opt_value").get<double>();
      cert.degenerate = cj.value("degenerate", false);
      inst.certificate = std::move(cert);
    }
    if (j.contains("start")) {
      const json& sj = j.at("start");
      DualIterate start;
      start.y = vector_field(sj, "y");
      start.s = vector_field(sj, "s");
      start.mu = sj.at("mu").get<double>();
      start.drift = VectorXd::Zero(start.s.size());
      inst.start = std::move(start);
    }
  } catch (const json::exception& e) {
    throw MalformedInstanceError(std::string("instance JSON has a missing or mistyped field: ") +
                                 e.what());
  }

  if (m < 1 || n < 1 || flat.size() != m * n) {
    std::ostringstream os;
    os << "instance '" << inst.name << "': A holds " << flat.size() << " numbers, expected m*n = "
       << m << "*" << n;
    throw DimensionError(os.str());
  }
  inst.A.resize(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < n; ++k) inst.A(i, k) = flat[i * n + k];
  if (inst.start && (inst.start->y.size() != m || inst.start->s.size() != n)) {
    throw DimensionError("instance '" + inst.name + "': start iterate has wrong dimensions");
  }
  inst.validate();
  return inst;
}

LpInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedInstanceError("cannot open instance file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return instance_from_json(buffer.str());
}

void save_instance(const LpInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write instance file " + path.string());
  out << instance_to_json(inst) << '\n';
}

}  // namespace qipm
