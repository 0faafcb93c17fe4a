#include "mmfnd/eval/grid.hpp"

#include <cstdio>
#include <sstream>

#include "mmfnd/core/errors.hpp"

namespace mmfnd::eval {

namespace {

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

GridTable evaluate_manipulation_grid(const std::vector<std::string>& model_names,
                                     const std::vector<NamedSet>& sets,
                                     const GridPredictFn& predict, Averaging averaging) {
  if (model_names.empty() || sets.empty())
    throw ConfigInvalidError("grid needs at least one model and one set");
  GridTable table;
  for (const NamedSet& set : sets) table.set_names.push_back(set.name);
  table.set_names.push_back("Total");

  for (const std::string& model : model_names) {
    GridRow row;
    row.model_name = model;
    std::vector<fusion::Prediction> all_preds;
    std::vector<LabeledId> all_truth;
    for (const NamedSet& set : sets) {
      std::vector<fusion::Prediction> preds = predict(model, set);
      row.cells.push_back(compute_metrics(preds, set.truth, averaging, set.name));
      all_preds.insert(all_preds.end(), preds.begin(), preds.end());
      all_truth.insert(all_truth.end(), set.truth.begin(), set.truth.end());
    }
    row.cells.push_back(compute_metrics(all_preds, all_truth, averaging, "Total"));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_grid_csv(const GridTable& table) {
  std::ostringstream out;
  out << "model";
  for (const std::string& set : table.set_names)
    out << "," << set << "_acc," << set << "_nf," << set << "_nr";
  out << "\n";
  for (const GridRow& row : table.rows) {
    out << row.model_name;
    for (const EvalReport& cell : row.cells)
      out << "," << fixed3(cell.accuracy) << "," << cell.predicted_fake << ","
          << cell.predicted_real;
    out << "\n";
  }
  return out.str();
}

std::string render_grid_text(const GridTable& table) {
  std::ostringstream out;
  std::size_t name_w = 5;  // "model"
  for (const GridRow& row : table.rows) name_w = std::max(name_w, row.model_name.size());

  out << std::string(name_w - 5, ' ') << "model";
  for (const std::string& set : table.set_names) {
    std::string head = set + " acc/nf/nr";
    out << "  " << head;
  }
  out << "\n";
  bool flagged = false;
  for (const GridRow& row : table.rows) {
    out << std::string(name_w - row.model_name.size(), ' ') << row.model_name;
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
      const EvalReport& cell = row.cells[c];
      std::string body = fixed3(cell.accuracy) + "/" + std::to_string(cell.predicted_fake) +
                         "/" + std::to_string(cell.predicted_real);
      if (cell.zero_division) {
        body += "*";
        flagged = true;
      }
      std::size_t w = table.set_names[c].size() + 10;  // header width
      if (body.size() < w) body = std::string(w - body.size(), ' ') + body;
      out << "  " << body;
    }
    out << "\n";
  }
  if (flagged) out << "* some precision/recall terms had empty denominators, reported as 0.0\n";
  return out.str();
}

std::string render_eval_report_text(const EvalReport& report) {
  std::ostringstream out;
  out << "set: " << (report.set_name.empty() ? "(unnamed)" : report.set_name) << "\n";
  out << "posts: " << report.confusion.total() << " (fake " << report.n_fake << ", real "
      << report.n_real << ")\n";
  out << "predicted: fake " << report.predicted_fake << ", real " << report.predicted_real
      << "\n";
  out << "confusion (fake positive): tp " << report.confusion.tp << ", fp "
      << report.confusion.fp << ", fn " << report.confusion.fn << ", tn " << report.confusion.tn
      << "\n";
  out << "accuracy: " << fixed3(report.accuracy) << "\n";
  out << "averaging: " << to_string(report.averaging) << "\n";
  out << "precision: " << fixed3(report.precision) << "  recall: " << fixed3(report.recall)
      << "  f1: " << fixed3(report.f1) << "\n";
  out << "fake class: p " << fixed3(report.fake_class.precision) << ", r "
      << fixed3(report.fake_class.recall) << ", f1 " << fixed3(report.fake_class.f1) << "\n";
  out << "real class: p " << fixed3(report.real_class.precision) << ", r "
      << fixed3(report.real_class.recall) << ", f1 " << fixed3(report.real_class.f1) << "\n";
  if (report.zero_division)
    out << "note: zero-denominator terms reported as 0.0\n";
  return out.str();
}

}  // namespace mmfnd::eval
