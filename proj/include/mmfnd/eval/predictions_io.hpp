#pragma once

#include <string>
#include <vector>

#include "mmfnd/fusion/model.hpp"

namespace mmfnd::eval {

// Line-delimited "post_id<TAB>score<TAB>label"; scores round-trip exactly.
void write_predictions(const std::string& path, const std::vector<fusion::Prediction>& preds);
std::vector<fusion::Prediction> read_predictions(const std::string& path);

}  // namespace mmfnd::eval
