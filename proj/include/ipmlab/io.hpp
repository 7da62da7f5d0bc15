#pragma once

// JSON and CSV formats. LP files hold A as dense rows or COO triplets, b, c,
// an optional start point and optional provenance.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ipmlab/harness.hpp"
#include "ipmlab/reductions.hpp"

namespace ipmlab {

inline constexpr int kLpSchemaVersion = 1;

/// Malformed input. For JSON syntax errors line and column are 1-based.
class InputError : public Error {
 public:
  InputError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct LpFile {
  LinearProgram<double> lp;
  std::optional<PrimalDualPoint<double>> init;
  std::optional<std::string> generator;
  std::optional<std::uint64_t> seed;
};

/// Parses an LP document. Shapes and finiteness are always checked; an
/// embedded start must be strictly interior.
LpFile parse_lp(const std::string& text);
LpFile load_lp(const std::string& path);

std::string lp_to_json(const LpFile& file);
void save_lp(const std::string& path, const LpFile& file);

/// 1-based (line, column) of a 0-based byte offset into text.
std::pair<std::size_t, std::size_t> line_column(const std::string& text,
                                                std::size_t offset);

std::string solution_to_json(const SolveOutcome<double>& out, const IpmConfig& cfg);
PrimalDualPoint<double> parse_solution_point(const std::string& text);

void write_trace_csv(std::ostream& os, const IterationTrace& trace);
void write_trials_csv(std::ostream& os, const ExperimentResult& res);
void write_summary_csv(std::ostream& os, const ExperimentResult& res);

std::string record_to_json(const ReductionRecord<double>& rec);
ReductionRecord<double> parse_record(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace ipmlab
