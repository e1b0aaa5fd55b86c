#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "fredom/dag.hpp"
#include "fredom/ordering.hpp"
#include "fredom/types.hpp"

namespace fredom {

enum class SeriesKind { Real, Complex };
enum class DagFormat { Csv, Json, Dot };

SeriesKind parse_series_kind(const std::string& s);
DagFormat parse_dag_format(const std::string& s);

/// CSV with a header row. Complex files hold `<label>_re,<label>_im` column pairs.
/// Errors name the offending data row (1-based) and column.
TimeSeriesMatrix ingest(const std::string& path, SeriesKind kind);
TimeSeriesMatrix ingest_stream(std::istream& in, SeriesKind kind, const std::string& source = "<stream>");

/// Series as CSV with 17 significant digits.
void write_series(const TimeSeriesMatrix& x, std::ostream& out);
void write_series(const TimeSeriesMatrix& x, const std::string& path);

/// Extra fields carried by the JSON form.
struct DagMetadata {
  std::optional<TopologicalOrder> order;
  std::optional<double> lambda;
};

/// csv: p x p 0/1 matrix, entry (from, to), label header.
/// json: labels, edges {from, to, weight_re, weight_im}, order, lambda, support.
/// dot: one edge statement per edge, |weight| label rounded to 3 decimals.
std::string render_dag(const SummaryDag& dag, DagFormat format, const DagMetadata& meta = {});
void emit_dag(const SummaryDag& dag, DagFormat format, const std::string& path, const DagMetadata& meta = {});

struct ParsedDag {
  SummaryDag dag;
  DagMetadata meta;
};

/// Inverse of render_dag(..., DagFormat::Json, ...).
ParsedDag parse_dag_json(const std::string& text);
/// Inverse of render_dag(..., DagFormat::Csv).
SummaryDag parse_dag_csv(const std::string& text);

}  // namespace fredom
