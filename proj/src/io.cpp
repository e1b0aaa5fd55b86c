#include "fredom/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"

namespace fredom {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

std::string format_double(double v, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path + " for writing");
  out << text;
  if (!out) throw InvalidArgument("failed writing " + path);
}

std::string dot_id(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

SeriesKind parse_series_kind(const std::string& s) {
  if (s == "real") return SeriesKind::Real;
  if (s == "complex") return SeriesKind::Complex;
  throw InvalidArgument("unknown series kind '" + s + "' (expected real or complex)");
}

DagFormat parse_dag_format(const std::string& s) {
  if (s == "csv") return DagFormat::Csv;
  if (s == "json") return DagFormat::Json;
  if (s == "dot") return DagFormat::Dot;
  throw InvalidArgument("unknown DAG format '" + s + "' (expected csv, json or dot)");
}

TimeSeriesMatrix ingest_stream(std::istream& in, SeriesKind kind, const std::string& source) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line))
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  if (header.empty()) throw InvalidArgument(source + ": missing header row");
  const std::size_t cols = header.size();

  std::vector<std::string> labels;
  if (kind == SeriesKind::Complex) {
    if (cols % 2 != 0) throw InvalidArgument(source + ": complex input needs an even number of columns");
    for (std::size_t c = 0; c < cols; c += 2) {
      const std::string& re = header[c];
      const std::string& im = header[c + 1];
      auto stem = [](const std::string& h, const std::string& suffix) -> std::optional<std::string> {
        if (h.size() <= suffix.size() || h.compare(h.size() - suffix.size(), suffix.size(), suffix) != 0)
          return std::nullopt;
        return h.substr(0, h.size() - suffix.size());
      };
      const auto a = stem(re, "_re"), b = stem(im, "_im");
      if (!a || !b || *a != *b)
        throw InvalidArgument(source + ": columns '" + re + "', '" + im + "' are not a <label>_re,<label>_im pair");
      labels.push_back(*a);
    }
  } else {
    labels = header;
  }
  for (const auto& l : labels)
    if (l.empty()) throw InvalidArgument(source + ": empty column label");

  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != cols)
      throw InvalidArgument(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(cols));
    std::vector<double> values(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& cell = cells[c];
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (first != last && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, values[c]);
      const std::string where = "row " + std::to_string(row) + ", column '" + header[c] + "'";
      if (ec != std::errc{} || ptr != last || cell.empty())
        throw InvalidArgument(source + ": non-numeric cell '" + cell + "' at " + where);
      if (!std::isfinite(values[c])) throw InvalidArgument(source + ": non-finite value at " + where);
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw InvalidArgument(source + ": no data rows");

  const Eigen::Index T = static_cast<Eigen::Index>(rows.size());
  if (kind == SeriesKind::Real) {
    RMat x(T, static_cast<Eigen::Index>(cols));
    for (Eigen::Index t = 0; t < T; ++t)
      for (std::size_t c = 0; c < cols; ++c) x(t, static_cast<Eigen::Index>(c)) = rows[t][c];
    return TimeSeriesMatrix::from_real(x, labels);
  }
  CMat x(T, static_cast<Eigen::Index>(cols / 2));
  for (Eigen::Index t = 0; t < T; ++t)
    for (std::size_t c = 0; c < cols / 2; ++c)
      x(t, static_cast<Eigen::Index>(c)) = cplx(rows[t][2 * c], rows[t][2 * c + 1]);
  return TimeSeriesMatrix::from_complex(x, labels);
}

TimeSeriesMatrix ingest(const std::string& path, SeriesKind kind) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return ingest_stream(in, kind, path);
}

void write_series(const TimeSeriesMatrix& x, std::ostream& out) {
  const auto labels = x.labels.empty() ? default_labels(x.dim()) : x.labels;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (c) out << ',';
    out << (x.is_real ? labels[c] : labels[c] + "_re," + labels[c] + "_im");
  }
  out << '\n';
  for (Eigen::Index t = 0; t < x.data.rows(); ++t) {
    for (Eigen::Index c = 0; c < x.data.cols(); ++c) {
      if (c) out << ',';
      out << format_double(x.data(t, c).real(), 17);
      if (!x.is_real) out << ',' << format_double(x.data(t, c).imag(), 17);
    }
    out << '\n';
  }
}

void write_series(const TimeSeriesMatrix& x, const std::string& path) {
  std::ostringstream os;
  write_series(x, os);
  write_text(os.str(), path);
}

std::string render_dag(const SummaryDag& dag, DagFormat format, const DagMetadata& meta) {
  dag.validate();
  const std::size_t p = dag.dim();
  const auto labels = dag.labels.empty() ? default_labels(p) : dag.labels;
  const auto edges = dag.edges();
  auto weight = [&](int from, int to) {
    return dag.weights ? (*dag.weights)(to, from) : cplx(1.0, 0.0);
  };
  std::ostringstream os;
  switch (format) {
    case DagFormat::Csv: {
      for (std::size_t c = 0; c < p; ++c) os << (c ? "," : "") << labels[c];
      os << '\n';
      for (std::size_t from = 0; from < p; ++from) {
        for (std::size_t to = 0; to < p; ++to)
          os << (to ? "," : "") << (dag.has_edge(static_cast<int>(from), static_cast<int>(to)) ? 1 : 0);
        os << '\n';
      }
      break;
    }
    case DagFormat::Json: {
      ordered_json j;
      j["labels"] = labels;
      j["edges"] = ordered_json::array();
      for (const auto& [from, to] : edges) {
        const cplx w = weight(from, to);
        j["edges"].push_back({{"from", labels[from]}, {"to", labels[to]}, {"weight_re", w.real()},
                              {"weight_im", w.imag()}});
      }
      if (meta.order) {
        std::vector<std::string> names;
        for (int k : meta.order->perm) names.push_back(labels.at(static_cast<std::size_t>(k)));
        j["order"] = names;
        j["support"] = meta.order->support;
      } else {
        j["order"] = nullptr;
        j["support"] = nullptr;
      }
      j["lambda"] = meta.lambda ? ordered_json(*meta.lambda) : ordered_json(nullptr);
      os << j.dump(2) << '\n';
      break;
    }
    case DagFormat::Dot: {
      os << "digraph summary {\n";
      for (const auto& l : labels) os << "  " << dot_id(l) << ";\n";
      for (const auto& [from, to] : edges) {
        std::ostringstream w;
        w << std::fixed << std::setprecision(3) << std::abs(weight(from, to));
        os << "  " << dot_id(labels[from]) << " -> " << dot_id(labels[to]) << " [label=\"" << w.str() << "\"];\n";
      }
      os << "}\n";
      break;
    }
  }
  return os.str();
}

void emit_dag(const SummaryDag& dag, DagFormat format, const std::string& path, const DagMetadata& meta) {
  write_text(render_dag(dag, format, meta), path);
}

ParsedDag parse_dag_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed DAG JSON: ") + e.what());
  }
  try {
    const auto labels = j.at("labels").get<std::vector<std::string>>();
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < labels.size(); ++k) index[labels[k]] = static_cast<int>(k);
    if (index.size() != labels.size()) throw InvalidArgument("duplicate labels in DAG JSON");
    ParsedDag out;
    out.dag = SummaryDag::empty(labels.size(), labels);
    out.dag.weights = CMat::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(labels.size()));
    for (const auto& e : j.at("edges")) {
      const int from = index.at(e.at("from").get<std::string>());
      const int to = index.at(e.at("to").get<std::string>());
      out.dag.adj(to, from) = 1;
      (*out.dag.weights)(to, from) = cplx(e.at("weight_re").get<double>(), e.at("weight_im").get<double>());
    }
    if (!j.at("order").is_null()) {
      TopologicalOrder order;
      for (const auto& name : j.at("order")) order.perm.push_back(index.at(name.get<std::string>()));
      order.support = j.at("support").get<double>();
      out.meta.order = order;
    }
    if (!j.at("lambda").is_null()) out.meta.lambda = j.at("lambda").get<double>();
    out.dag.validate();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("invalid DAG JSON: ") + e.what());
  } catch (const std::out_of_range&) {
    throw InvalidArgument("DAG JSON references an unknown label");
  }
}

SummaryDag parse_dag_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty adjacency CSV");
  const auto labels = split_csv_line(line);
  SummaryDag dag = SummaryDag::empty(labels.size(), labels);
  std::size_t from = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (from >= labels.size() || cells.size() != labels.size()) throw InvalidArgument("adjacency CSV is not square");
    for (std::size_t to = 0; to < cells.size(); ++to) {
      if (cells[to] != "0" && cells[to] != "1") throw InvalidArgument("adjacency entries must be 0 or 1");
      dag.adj(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = cells[to] == "1";
    }
    ++from;
  }
  if (from != labels.size()) throw InvalidArgument("adjacency CSV is not square");
  dag.validate();
  return dag;
}

}  // namespace fredom
