#include "mmfnd/core/types.hpp"

#include "mmfnd/core/errors.hpp"

namespace mmfnd {

std::string_view to_string(Label v) {
  return v == Label::FAKE ? "fake" : "real";
}

std::string_view to_string(Split v) {
  switch (v) {
    case Split::TRAIN: return "train";
    case Split::VALIDATION: return "validation";
    case Split::TEST: return "test";
  }
  return "?";
}

std::string_view to_string(Origin v) {
  switch (v) {
    case Origin::ME2015: return "me2015";
    case Origin::ME2016: return "me2016";
    case Origin::VN: return "vn";
    case Origin::SYNTHETIC: return "synthetic";
  }
  return "?";
}

std::string_view to_string(Technique v) {
  switch (v) {
    case Technique::EVT_REP: return "evtrep";
    case Technique::EVT_REM: return "evtrem";
    case Technique::FAKE_IM: return "fakeim";
    case Technique::REAL_IM: return "realim";
    case Technique::ENTITY_REP: return "entrep";
  }
  return "?";
}

Label label_from_string(std::string_view s) {
  if (s == "fake") return Label::FAKE;
  if (s == "real") return Label::REAL;
  throw EncodingError("unknown label value: '" + std::string(s) + "'");
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::TRAIN;
  if (s == "validation") return Split::VALIDATION;
  if (s == "test") return Split::TEST;
  throw EncodingError("unknown split value: '" + std::string(s) + "'");
}

Origin origin_from_string(std::string_view s) {
  if (s == "me2015") return Origin::ME2015;
  if (s == "me2016") return Origin::ME2016;
  if (s == "vn") return Origin::VN;
  if (s == "synthetic") return Origin::SYNTHETIC;
  throw EncodingError("unknown origin value: '" + std::string(s) + "'");
}

Technique technique_from_string(std::string_view s) {
  if (s == "evtrep") return Technique::EVT_REP;
  if (s == "evtrem") return Technique::EVT_REM;
  if (s == "fakeim") return Technique::FAKE_IM;
  if (s == "realim") return Technique::REAL_IM;
  if (s == "entrep") return Technique::ENTITY_REP;
  throw EncodingError("unknown technique value: '" + std::string(s) + "'");
}

std::string ManipulationRecord::reference() const {
  return std::string(to_string(technique)) + ":" + source_id;
}

std::string namespaced_id(Origin origin, std::string_view native_id) {
  std::string id(to_string(origin));
  id.push_back('/');
  id.append(native_id);
  return id;
}

}  // namespace mmfnd
