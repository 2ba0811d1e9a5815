#include "lowrank/io.hpp"

#include "lowrank/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace lowrank::io {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string matrix_to_csv(const Matrix &x) {
  std::string out;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (j > 0)
        out += ',';
      out += format_double(x(i, j));
    }
    out += '\n';
  }
  return out;
}

namespace {

double parse_double(std::string_view token) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t'))
    token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' ||
                            token.back() == '\r'))
    token.remove_suffix(1);
  if (!token.empty() && token.front() == '+')
    token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw ArgumentError("invalid number in CSV: '" + std::string(token) + "'");
  return value;
}

Index json_index(const Json &j, const char *key) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw ArgumentError(std::string("missing integer field '") + key + "'");
  return j.at(key).get<Index>();
}

} // namespace

Matrix matrix_from_csv(const std::string &text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(parse_double(std::string_view(line).substr(
          start, comma == std::string::npos ? std::string::npos
                                            : comma - start)));
      if (comma == std::string::npos)
        break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ArgumentError("CSV rows have differing lengths");
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw ArgumentError("CSV matrix is empty");
  Matrix x(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j)
      x(i, j) = rows[i][j];
  require_finite(x, "CSV matrix");
  return x;
}

Json matrix_to_json(const Matrix &x) {
  Json entries = Json::array();
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j)
      entries.push_back(x(i, j));
  return {{"rows", x.rows()}, {"cols", x.cols()}, {"entries", entries}};
}

Matrix matrix_from_json(const Json &j) {
  if (!j.is_object())
    throw ArgumentError("matrix must be a JSON object");
  const Index rows = json_index(j, "rows");
  const Index cols = json_index(j, "cols");
  if (rows < 0 || cols < 0)
    throw ArgumentError("matrix dimensions must be nonnegative");
  if (!j.contains("entries") || !j.at("entries").is_array())
    throw ArgumentError("matrix needs an 'entries' array");
  const auto &entries = j.at("entries");
  if (static_cast<Index>(entries.size()) != rows * cols)
    throw ArgumentError("matrix entries count does not equal rows * cols");
  Matrix x(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) {
      const auto &e = entries[static_cast<std::size_t>(i * cols + k)];
      if (!e.is_number())
        throw ArgumentError("matrix entries must be numbers");
      x(i, k) = e.get<double>();
    }
  if (!x.allFinite())
    throw ArgumentError("matrix entries must be finite");
  return x;
}

Json point_to_json(const VarietyPoint &point) {
  Json sigma = Json::array();
  for (Index j = 0; j < point.rank(); ++j)
    sigma.push_back(point.sigma()(j));
  return {{"u", matrix_to_json(point.u())},
          {"sigma", sigma},
          {"v", matrix_to_json(point.v())},
          {"rank", point.rank()},
          {"m", point.rows()},
          {"n", point.cols()},
          {"r", point.rank_bound()}};
}

VarietyPoint point_from_json(const Json &j) {
  const Index m = json_index(j, "m");
  const Index n = json_index(j, "n");
  const Index r = json_index(j, "r");
  const Index rank = json_index(j, "rank");
  if (rank == 0)
    return VarietyPoint(m, n, r);
  Matrix u = matrix_from_json(j.at("u"));
  Matrix v = matrix_from_json(j.at("v"));
  const auto &s = j.at("sigma");
  if (!s.is_array() || static_cast<Index>(s.size()) != rank)
    throw ArgumentError("sigma length does not match rank");
  Vector sigma(rank);
  for (Index k = 0; k < rank; ++k)
    sigma(k) = s[static_cast<std::size_t>(k)].get<double>();
  if (u.rows() != m || v.rows() != n)
    throw ArgumentError("factor shapes do not match (m, n)");
  return VarietyPoint::from_factors(std::move(u), std::move(sigma),
                                    std::move(v), r);
}

std::shared_ptr<CostFunction> problem_from_json(const Json &j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw ArgumentError("problem document needs a string 'type'");
  if (!j.contains("shape") || !j.at("shape").is_array() ||
      j.at("shape").size() != 2)
    throw ArgumentError("problem document needs 'shape': [m, n]");
  const Index m = j.at("shape")[0].get<Index>();
  const Index n = j.at("shape")[1].get<Index>();
  if (!j.contains("payload") || !j.at("payload").is_object())
    throw ArgumentError("problem document needs an object 'payload'");
  const auto &payload = j.at("payload");
  const auto type = j.at("type").get<std::string>();

  auto check_shape = [&](const Matrix &x, const char *what) {
    if (x.rows() != m || x.cols() != n)
      throw ArgumentError(std::string(what) + " shape does not match 'shape'");
  };

  if (type == "lowrank_approx") {
    Matrix target = matrix_from_json(payload.at("target"));
    check_shape(target, "target");
    return std::make_shared<LowRankApproxProblem>(std::move(target));
  }
  if (type == "completion") {
    Matrix target = matrix_from_json(payload.at("target"));
    Matrix mask = matrix_from_json(payload.at("mask"));
    check_shape(target, "target");
    check_shape(mask, "mask");
    return std::make_shared<MatrixCompletionProblem>(std::move(target),
                                                     std::move(mask));
  }
  if (type == "polynomial") {
    std::vector<PolynomialTerm> terms;
    for (const auto &t : payload.at("terms")) {
      PolynomialTerm term;
      term.coeff = t.at("coeff").get<double>();
      for (const auto &f : t.at("monomial")) {
        if (!f.is_array() || f.size() != 3)
          throw ArgumentError("monomial factors are [row, col, power]");
        term.monomial.push_back(
            {f[0].get<Index>(), f[1].get<Index>(), f[2].get<int>()});
      }
      terms.push_back(std::move(term));
    }
    return std::make_shared<PolynomialProblem>(m, n, std::move(terms));
  }
  throw ArgumentError("unknown problem type '" + type + "'");
}

Json problem_to_json(const CostFunction &problem) {
  Json j{{"shape", {problem.rows(), problem.cols()}}};
  if (const auto *p = dynamic_cast<const LowRankApproxProblem *>(&problem)) {
    j["type"] = "lowrank_approx";
    j["payload"] = {{"target", matrix_to_json(p->target())}};
  } else if (const auto *p =
                 dynamic_cast<const MatrixCompletionProblem *>(&problem)) {
    j["type"] = "completion";
    j["payload"] = {{"target", matrix_to_json(p->target())},
                    {"mask", matrix_to_json(p->mask())}};
  } else if (const auto *p =
                 dynamic_cast<const PolynomialProblem *>(&problem)) {
    Json terms = Json::array();
    for (const auto &t : p->terms()) {
      Json mono = Json::array();
      for (const auto &f : t.monomial)
        mono.push_back({f.row, f.col, f.power});
      terms.push_back({{"monomial", mono}, {"coeff", t.coeff}});
    }
    j["type"] = "polynomial";
    j["payload"] = {{"terms", terms}};
  } else {
    throw ArgumentError("problem type has no JSON encoding");
  }
  return j;
}

std::string trace_to_csv(const Trace &trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto &r : trace.records) {
    out += std::to_string(r.index) + ',' + format_double(r.f_value) + ',' +
           format_double(r.s_value) + ',' + std::to_string(r.rank) + ',' +
           std::to_string(r.delta_rank) + ',' + std::to_string(r.chosen_j) +
           ',' + format_double(r.accepted_alpha) + ',' +
           std::to_string(r.candidates_evaluated) + '\n';
  }
  return out;
}

Json trace_summary(const Trace &trace) {
  return {{"termination", to_string(trace.termination)},
          {"iters", trace.records.size()},
          {"final_f", trace.final_f},
          {"final_s", trace.final_s},
          {"final_rank", trace.final_point.rank()},
          {"wall_time_ms", trace.wall_time_ms}};
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ArgumentError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string &path) {
  const auto text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error &e) {
    throw ArgumentError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ArgumentError("cannot write '" + path + "'");
  out << content;
  if (!out)
    throw ArgumentError("failed writing '" + path + "'");
}

} // namespace lowrank::io
