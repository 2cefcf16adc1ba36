#include "matrix_json.hpp"

#include <cmath>

namespace cpext::io {

json to_json(const Mat& m) {
  json data = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    data.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(path, "expected a finite number");
  return v;
}

long integer_at(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<long>();
}

Mat matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected a matrix object");
  for (const char* key : {"rows", "cols", "data"})
    if (!j.contains(key)) throw ParseError(path, std::string("missing field '") + key + "'");
  long rows = integer_at(j["rows"], path + "/rows"), cols = integer_at(j["cols"], path + "/cols");
  if (rows < 1 || cols < 1) throw ParseError(path, "matrix dimensions must be positive");
  const json& data = j["data"];
  if (!data.is_array() || (long)data.size() != rows) throw ParseError(path + "/data", "expected " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const std::string rp = path + "/data/" + std::to_string(r);
    if (!data[r].is_array() || (long)data[r].size() != cols)
      throw ParseError(rp, "expected " + std::to_string(cols) + " entries");
    for (long c = 0; c < cols; ++c) {
      const std::string ep = rp + "/" + std::to_string(c);
      const json& e = data[r][c];
      if (e.is_number()) {
        m(r, c) = number_at(e, ep);
      } else if (e.is_array() && e.size() == 2) {
        m(r, c) = cplx(number_at(e[0], ep + "/0"), number_at(e[1], ep + "/1"));
      } else {
        throw ParseError(ep, "expected [re, im] or a number");
      }
    }
  }
  return m;
}

json to_json(const RVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RVec vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of numbers");
  RVec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = number_at(j[i], path + "/" + std::to_string(i));
  return v;
}

std::vector<Mat> matrices_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array of matrices");
  std::vector<Mat> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(matrix_from_json(j[i], path + "/" + std::to_string(i)));
  return out;
}

json to_json(const std::vector<Mat>& ms) {
  json a = json::array();
  for (const Mat& m : ms) a.push_back(to_json(m));
  return a;
}

}  // namespace cpext::io
