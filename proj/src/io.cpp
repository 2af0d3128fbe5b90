#include "markov_rank/io.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace markov_rank {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_decimal(std::string_view text, std::string_view whole) {
  const std::string buf(trim(text));
  if (buf.empty()) throw ParseError("empty numeric literal in '" + std::string(whole) + "'");
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE) {
    throw ParseError("malformed numeric literal '" + std::string(whole) + "'");
  }
  return value;
}

MatrixKind parse_kind(std::string_view kind) {
  if (kind == "stochastic") return MatrixKind::Stochastic;
  if (kind == "nonnegative") return MatrixKind::Nonnegative;
  throw ParseError("unknown matrix kind '" + std::string(kind) + "'");
}

Matrix<double> to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ValidationError("matrix has no rows");
  const auto n = static_cast<Index>(rows.size());
  Matrix<double> m(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != n) {
      throw ValidationError("matrix is not square: row " + std::to_string(i + 1) + " has " +
                            std::to_string(row.size()) + " entries, expected " +
                            std::to_string(n));
    }
    for (Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

TransitionMatrixd load_json(std::istream& source) {
  nlohmann::json doc;
  try {
    source >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rows") || !doc["rows"].is_array()) {
    throw ParseError("JSON matrix must be an object with a \"rows\" array");
  }
  MatrixKind kind = MatrixKind::Stochastic;
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) throw ParseError("\"kind\" must be a string");
    kind = parse_kind(doc["kind"].get<std::string>());
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : doc["rows"]) {
    if (!row.is_array()) throw ParseError("each row must be an array");
    auto& out = rows.emplace_back();
    for (const auto& entry : row) {
      if (entry.is_number()) {
        out.push_back(entry.get<double>());
      } else if (entry.is_string()) {
        out.push_back(parse_entry(entry.get<std::string>()));
      } else {
        throw ParseError("matrix entries must be numbers or \"a/b\" strings");
      }
    }
  }
  return TransitionMatrixd(to_matrix(rows), kind);
}

TransitionMatrixd load_csv(std::istream& source) {
  MatrixKind kind = MatrixKind::Stochastic;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(source, line)) {
    const auto body = trim(line);
    if (first && body.starts_with("#")) {
      first = false;
      auto header = trim(body.substr(1));
      if (!header.starts_with("kind=")) throw ParseError("unrecognized CSV header '" + line + "'");
      kind = parse_kind(trim(header.substr(5)));
      continue;
    }
    first = false;
    if (body.empty()) continue;
    rows.push_back(parse_entry_list(body));
  }
  if (rows.empty()) throw ParseError("CSV input contains no rows");
  return TransitionMatrixd(to_matrix(rows), kind);
}

}  // namespace

double parse_entry(std::string_view text) {
  const auto body = trim(text);
  const auto slash = body.find('/');
  if (slash == std::string_view::npos) return parse_decimal(body, text);
  const double num = parse_decimal(body.substr(0, slash), text);
  const double den = parse_decimal(body.substr(slash + 1), text);
  if (den == 0.0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

std::vector<double> parse_entry_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_entry(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

TransitionMatrixd load_matrix(std::istream& source, InputFormat format) {
  return format == InputFormat::Json ? load_json(source) : load_csv(source);
}

TransitionMatrixd load_matrix_file(const std::string& path, InputFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return load_matrix(in, format);
}

InputFormat format_from_path(const std::string& path) {
  return path.ends_with(".csv") ? InputFormat::Csv : InputFormat::Json;
}

}  // namespace markov_rank
