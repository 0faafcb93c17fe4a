#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mmfnd/eval/metrics.hpp"

namespace mmfnd::eval {

// One manipulation test set: display name plus ground truth in post order.
struct NamedSet {
  std::string name;
  std::vector<LabeledId> truth;
};

struct GridRow {
  std::string model_name;
  std::vector<EvalReport> cells;  // one per set, then the Total column
};

struct GridTable {
  std::vector<std::string> set_names;  // column order, Total appended
  std::vector<GridRow> rows;
};

using GridPredictFn = std::function<std::vector<fusion::Prediction>(
    const std::string& model_name, const NamedSet& set)>;

// One row per model, one cell per set in the given order, plus a Total cell
// computed over the concatenation of every set (micro accuracy by
// construction). The predict callback supplies each model's predictions and
// may throw MissingCacheError for sets it cannot score.
GridTable evaluate_manipulation_grid(const std::vector<std::string>& model_names,
                                     const std::vector<NamedSet>& sets,
                                     const GridPredictFn& predict,
                                     Averaging averaging = Averaging::MACRO);

// Byte-stable renderings of the grid, Table-4 layout: per set, the accuracy
// and the counts predicted fake / real.
std::string render_grid_csv(const GridTable& table);
std::string render_grid_text(const GridTable& table);

// Single-report rendering for the evaluate command.
std::string render_eval_report_text(const EvalReport& report);

}  // namespace mmfnd::eval
