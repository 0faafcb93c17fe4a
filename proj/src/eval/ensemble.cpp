#include "mmfnd/eval/ensemble.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mmfnd/core/errors.hpp"

namespace mmfnd::eval {

void EnsembleSpec::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw EncodingError("cannot open ensemble spec for writing: " + path);
  nlohmann::json j{{"members", member_checkpoints}, {"rule", "majority"}};
  out << j.dump(2) << "\n";
}

EnsembleSpec EnsembleSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingCacheError("no ensemble spec at " + path);
  EnsembleSpec spec;
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    spec.member_checkpoints = j.at("members").get<std::vector<std::string>>();
    if (j.at("rule").get<std::string>() != "majority")
      throw ConfigInvalidError("unknown ensemble rule in " + path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalidError("bad ensemble spec " + path + ": " + e.what());
  }
  return spec;
}

std::vector<fusion::Prediction> majority_vote(
    const std::vector<std::vector<fusion::Prediction>>& members) {
  if (members.empty() || members.size() % 2 == 0)
    throw EvenMemberCountError("majority voting needs an odd member count, got " +
                               std::to_string(members.size()));
  const std::size_t n = members.front().size();
  for (const auto& m : members)
    if (m.size() != n)
      throw MisalignedIdsError("ensemble members disagree on prediction count");

  std::vector<fusion::Prediction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& id = members.front()[i].post_id;
    std::size_t fake_votes = 0;
    double score_sum = 0.0;
    bool all_equal = true;
    for (const auto& m : members) {
      if (m[i].post_id != id)
        throw MisalignedIdsError("ensemble members disagree on post order at " + id);
      if (m[i].label == Label::FAKE) ++fake_votes;
      score_sum += m[i].score;
      all_equal = all_equal && m[i].score == members.front()[i].score;
    }
    fusion::Prediction p;
    p.post_id = id;
    p.score = all_equal ? members.front()[i].score
                        : score_sum / static_cast<double>(members.size());
    p.label = fake_votes * 2 > members.size() ? Label::FAKE : Label::REAL;
    out.push_back(p);
  }
  return out;
}

}  // namespace mmfnd::eval
