#include "mmfnd/eval/predictions_io.hpp"

#include <cstdio>
#include <fstream>

#include "mmfnd/core/errors.hpp"

namespace mmfnd::eval {

void write_predictions(const std::string& path, const std::vector<fusion::Prediction>& preds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw EncodingError("cannot open predictions file for writing: " + path);
  char score[64];
  for (const fusion::Prediction& p : preds) {
    std::snprintf(score, sizeof score, "%.17g", p.score);
    out << p.post_id << "\t" << score << "\t" << to_string(p.label) << "\n";
  }
  if (!out) throw EncodingError("short write on predictions file: " + path);
}

std::vector<fusion::Prediction> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingCacheError("no predictions file at " + path);
  std::vector<fusion::Prediction> preds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw EncodingError("bad predictions line " + std::to_string(line_no) + " in " + path);
    fusion::Prediction p;
    p.post_id = line.substr(0, t1);
    try {
      p.score = std::stod(line.substr(t1 + 1, t2 - t1 - 1));
    } catch (const std::exception&) {
      throw EncodingError("bad score on predictions line " + std::to_string(line_no) + " in " +
                          path);
    }
    p.label = label_from_string(line.substr(t2 + 1));
    preds.push_back(std::move(p));
  }
  return preds;
}

}  // namespace mmfnd::eval
