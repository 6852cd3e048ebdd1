#include "zerolm/space_io.hpp"

#include <fstream>
#include <sstream>

#include "zerolm/error.hpp"

namespace zerolm {

using nlohmann::json;

namespace {

const json &require(const json &j, const char *key, const std::string &where) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(where.empty() ? key : where + "." + key, "missing field");
  return j.at(key);
}

void check_schema(const json &j, const std::string &what) {
  const auto &v = require(j, "schema_version", "");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw ValidationError("schema_version", what + " schema version " + v.dump() +
                                                " is not supported (expected " +
                                                std::to_string(kSchemaVersion) + ")");
}

std::vector<DimValue> values_from_json(const json &j, const std::string &field) {
  if (!j.is_array())
    throw ValidationError(field, "expected an array of values");
  std::vector<DimValue> out;
  for (const auto &v : j)
    out.push_back(dim_value_from_json(v, field));
  return out;
}

json modules_to_json(const std::vector<ModuleDef> &mods) {
  json out = json::array();
  for (const auto &m : mods) {
    json jm{{"name", m.name}, {"block", to_string(m.block)}, {"rows", m.rows}, {"cols", m.cols}};
    if (m.count != "1")
      jm["count"] = m.count;
    out.push_back(std::move(jm));
  }
  return out;
}

std::string expr_field(const json &j, const char *key, const std::string &where) {
  const auto &v = require(j, key, where);
  if (v.is_number_integer())
    return std::to_string(v.get<std::int64_t>());
  if (!v.is_string())
    throw ValidationError(where + "." + key, "expected an expression string");
  return v.get<std::string>();
}

std::vector<ModuleDef> modules_from_json(const json &j, const std::string &field) {
  std::vector<ModuleDef> out;
  if (j.is_null())
    return out;
  if (!j.is_array())
    throw ValidationError(field, "expected an array of modules");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto &jm = j[i];
    const std::string where = field + "[" + std::to_string(i) + "]";
    ModuleDef m;
    m.name = require(jm, "name", where).get<std::string>();
    m.block = block_from_string(require(jm, "block", where).get<std::string>());
    m.rows = expr_field(jm, "rows", where);
    m.cols = expr_field(jm, "cols", where);
    if (jm.contains("count"))
      m.count = expr_field(jm, "count", where);
    out.push_back(std::move(m));
  }
  return out;
}

DimAssignment assignment_from_json(const json &j, const std::string &field) {
  if (!j.is_object())
    throw ValidationError(field, "expected an object");
  DimAssignment out;
  for (const auto &[k, v] : j.items())
    out.emplace(k, dim_value_from_json(v, field + "." + k));
  return out;
}

json assignment_to_json(const DimAssignment &a) {
  json out = json::object();
  for (const auto &[k, v] : a)
    out[k] = dim_value_to_json(v);
  return out;
}

} // namespace

json dim_value_to_json(const DimValue &value) {
  if (const auto *i = std::get_if<std::int64_t>(&value))
    return *i;
  return std::get<std::string>(value);
}

DimValue dim_value_from_json(const json &j, const std::string &field) {
  if (j.is_number_integer())
    return j.get<std::int64_t>();
  if (j.is_string())
    return j.get<std::string>();
  throw ValidationError(field, "values must be integers or strings, got " + j.dump());
}

json to_json(const SearchSpaceDef &def) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = def.name;
  j["kind"] = to_string(def.kind);
  if (const auto *fixed = std::get_if<std::int64_t>(&def.layers))
    j["layers"] = *fixed;
  else
    j["layers"] = std::get<std::string>(def.layers);
  json dims = json::array();
  for (const auto &d : def.dimensions) {
    json jd{{"name", d.name}, {"layer_scoped", d.layer_scoped}};
    if (d.per_layer_values.empty()) {
      jd["values"] = json::array();
      for (const auto &v : d.values)
        jd["values"].push_back(dim_value_to_json(v));
    } else {
      jd["per_layer_values"] = json::array();
      for (const auto &list : d.per_layer_values) {
        json jl = json::array();
        for (const auto &v : list)
          jl.push_back(dim_value_to_json(v));
        jd["per_layer_values"].push_back(std::move(jl));
      }
    }
    dims.push_back(std::move(jd));
  }
  j["dimensions"] = std::move(dims);
  j["constants"] = json::object();
  for (const auto &[k, v] : def.constants)
    j["constants"][k] = v;
  j["global_modules"] = modules_to_json(def.global_modules);
  j["layer_modules"] = modules_to_json(def.layer_modules);
  j["attention_width"] = def.attention_width;
  j["count_biases"] = def.count_biases;
  return j;
}

SearchSpaceDef space_def_from_json(const json &j) {
  try {
    check_schema(j, "search space");
    SearchSpaceDef def;
    def.name = require(j, "name", "").get<std::string>();
    def.kind = space_kind_from_string(require(j, "kind", "").get<std::string>());
    const auto &layers = require(j, "layers", "");
    if (layers.is_number_integer())
      def.layers = layers.get<std::int64_t>();
    else if (layers.is_string())
      def.layers = layers.get<std::string>();
    else
      throw ValidationError("layers", "expected a layer count or a dimension name");
    const auto &dims = require(j, "dimensions", "");
    if (!dims.is_array())
      throw ValidationError("dimensions", "expected an array");
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const auto &jd = dims[i];
      const std::string where = "dimensions[" + std::to_string(i) + "]";
      DimensionDef d;
      d.name = require(jd, "name", where).get<std::string>();
      d.layer_scoped = jd.value("layer_scoped", false);
      if (jd.contains("per_layer_values")) {
        for (const auto &list : jd.at("per_layer_values"))
          d.per_layer_values.push_back(values_from_json(list, where + ".per_layer_values"));
      } else {
        d.values = values_from_json(require(jd, "values", where), where + ".values");
      }
      def.dimensions.push_back(std::move(d));
    }
    if (j.contains("constants"))
      for (const auto &[k, v] : j.at("constants").items()) {
        if (!v.is_number_integer())
          throw ValidationError("constants." + k, "constants must be integers");
        def.constants[k] = v.get<std::int64_t>();
      }
    def.global_modules = modules_from_json(j.value("global_modules", json()), "global_modules");
    def.layer_modules = modules_from_json(j.value("layer_modules", json()), "layer_modules");
    def.attention_width = j.value("attention_width", std::string("hidden"));
    def.count_biases = j.value("count_biases", false);
    return def;
  } catch (const json::exception &e) {
    throw ValidationError("search space", e.what());
  }
}

SearchSpace load_space(const std::filesystem::path &path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(path.string(), 1, e.what());
  }
  return SearchSpace(space_def_from_json(j));
}

void save_space(const std::filesystem::path &path, const SearchSpaceDef &def) {
  write_text_file(path, to_json(def).dump(2) + "\n");
}

json to_json(const ArchitectureSpec &arch) {
  json j;
  j["id"] = arch.id;
  j["space"] = arch.space;
  j["num_layers"] = arch.num_layers;
  j["globals"] = assignment_to_json(arch.globals);
  j["layers"] = json::array();
  for (const auto &layer : arch.layers)
    j["layers"].push_back(assignment_to_json(layer));
  return j;
}

ArchitectureSpec arch_from_json(const json &j) {
  try {
    ArchitectureSpec arch;
    arch.id = j.value("id", std::string());
    arch.space = j.value("space", std::string());
    arch.num_layers = require(j, "num_layers", "").get<std::int64_t>();
    arch.globals = assignment_from_json(require(j, "globals", ""), "globals");
    const auto &layers = require(j, "layers", "");
    if (!layers.is_array())
      throw ValidationError("layers", "expected an array");
    for (std::size_t l = 0; l < layers.size(); ++l)
      arch.layers.push_back(assignment_from_json(layers[l], "layers[" + std::to_string(l) + "]"));
    return arch;
  } catch (const json::exception &e) {
    throw ValidationError("architecture", e.what());
  }
}

std::vector<ArchitectureSpec> load_architectures(const std::filesystem::path &path,
                                                 const SearchSpace &space) {
  std::istringstream in(read_text_file(path));
  std::vector<ArchitectureSpec> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      json j = json::parse(line);
      if (j.contains("schema_version"))
        check_schema(j, "architecture");
      auto arch = arch_from_json(j);
      validate(space, arch);
      if (arch.id.empty())
        arch.id = architecture_id(space.name(), arch);
      arch.space = space.name();
      out.push_back(std::move(arch));
    } catch (const json::exception &e) {
      throw ParseError(path.string(), lineno, e.what());
    } catch (const ValidationError &e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return out;
}

void save_architectures(const std::filesystem::path &path, const std::vector<ArchitectureSpec> &archs) {
  std::string text;
  for (const auto &a : archs) {
    json j = to_json(a);
    j["schema_version"] = kSchemaVersion;
    text += j.dump() + "\n";
  }
  write_text_file(path, text);
}

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out)
    throw IoError("write to '" + path.string() + "' failed");
}

} // namespace zerolm
