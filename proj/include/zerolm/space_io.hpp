#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zerolm/archspace.hpp"

namespace zerolm {

nlohmann::json to_json(const SearchSpaceDef &def);
SearchSpaceDef space_def_from_json(const nlohmann::json &j);

SearchSpace load_space(const std::filesystem::path &path);
void save_space(const std::filesystem::path &path, const SearchSpaceDef &def);

nlohmann::json dim_value_to_json(const DimValue &value);
DimValue dim_value_from_json(const nlohmann::json &j, const std::string &field);

/// Architecture record fields (id, space, num_layers, globals, layers).
nlohmann::json to_json(const ArchitectureSpec &arch);
ArchitectureSpec arch_from_json(const nlohmann::json &j);

/// Architecture files hold one JSON record per line. Each record is validated
/// against `space`; blank lines are skipped.
std::vector<ArchitectureSpec> load_architectures(const std::filesystem::path &path,
                                                 const SearchSpace &space);
void save_architectures(const std::filesystem::path &path, const std::vector<ArchitectureSpec> &archs);

std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, const std::string &text);

} // namespace zerolm
