#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpext/linalg.hpp"

namespace cpext::io {

using json = nlohmann::ordered_json;

// Raised for malformed input; path is a JSON pointer to the offending value.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// {"rows": r, "cols": c, "data": [[[re, im], ...], ...]}; a bare number is
// accepted for a real entry.
json to_json(const Mat& m);
Mat matrix_from_json(const json& j, const std::string& path);

json to_json(const RVec& v);
RVec vector_from_json(const json& j, const std::string& path);

std::vector<Mat> matrices_from_json(const json& j, const std::string& path);
json to_json(const std::vector<Mat>& ms);

double number_at(const json& j, const std::string& path);
long integer_at(const json& j, const std::string& path);

}  // namespace cpext::io
