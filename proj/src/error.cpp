#include "zerolm/error.hpp"

namespace zerolm {

ValidationError::ValidationError(std::string field, const std::string &message)
    : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

ParseError::ParseError(std::string path, std::size_t line, const std::string &message)
    : ValidationError(path + ":" + std::to_string(line), message), line_(line) {}

} // namespace zerolm
