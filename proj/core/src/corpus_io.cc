#include <algorithm>
#include <sstream>

#include "file_util.h"
#include "json.hpp"
#include "newsclust/corpus.h"
#include "newsclust/error.h"

namespace newsclust {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxReportedErrors = 20;

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<std::string> OptionalString(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (j[key].is_string()) return j[key].get<std::string>();
  if (j[key].is_number_integer()) return j[key].dump();
  throw ValidationError(std::string("field '") + key +
                        "' must be a string or null");
}

DocumentInput ParseDocument(const json& j) {
  DocumentInput d;
  d.id = j.at("id").get<std::string>();
  if (d.id.empty()) throw ValidationError("empty id");
  d.language = j.contains("lang") && j["lang"].is_string()
                   ? j["lang"].get<std::string>()
                   : "";
  d.timestamp = ParseIso8601(j.at("date").get<std::string>());
  d.title = OptionalString(j, "title");
  if (d.title && Trim(*d.title).empty()) d.title.reset();
  if (j.contains("paragraphs")) {
    for (const json& p : j["paragraphs"]) {
      const std::string_view t = Trim(p.get_ref<const std::string&>());
      if (!t.empty()) d.paragraphs.emplace_back(t);
    }
  } else if (j.contains("text")) {
    d.paragraphs = SplitParagraphs(j["text"].get<std::string>());
  } else {
    throw ValidationError("needs 'paragraphs' or 'text'");
  }
  if (d.paragraphs.empty()) throw ValidationError("no nonempty paragraphs");
  d.gold_label = OptionalString(j, "cluster");
  return d;
}

}  // namespace

std::vector<std::string> SplitParagraphs(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  auto flush = [&] {
    const std::string_view t = Trim(current);
    if (!t.empty()) out.emplace_back(t);
    current.clear();
  };
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                       : nl - pos);
    if (Trim(line).empty()) {
      flush();
    } else {
      if (!current.empty()) current += '\n';
      current += line;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return out;
}

std::vector<DocumentInput> ParseCorpus(std::string_view text) {
  std::vector<DocumentInput> docs;
  std::vector<std::string> errors;
  std::set<std::string> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      DocumentInput d = ParseDocument(json::parse(line));
      if (!ids.insert(d.id).second) {
        throw ValidationError("duplicate id '" + d.id + "'");
      }
      docs.push_back(std::move(d));
    } catch (const std::exception& e) {
      errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "malformed corpus (" + std::to_string(errors.size()) +
                      " bad lines)";
    for (std::size_t i = 0; i < errors.size() && i < kMaxReportedErrors; ++i) {
      msg += "; " + errors[i];
    }
    throw ValidationError(msg);
  }
  std::stable_sort(docs.begin(), docs.end(),
                   [](const DocumentInput& a, const DocumentInput& b) {
                     if (a.timestamp != b.timestamp) {
                       return a.timestamp < b.timestamp;
                     }
                     return a.id < b.id;
                   });
  return docs;
}

std::vector<DocumentInput> LoadCorpus(const std::filesystem::path& path) {
  try {
    return ParseCorpus(internal::ReadFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string FormatCorpus(std::span<const DocumentInput> docs) {
  std::string out;
  for (const DocumentInput& d : docs) {
    json j = {{"id", d.id},
              {"lang", d.language},
              {"date", FormatIso8601(d.timestamp)},
              {"title", d.title ? json(*d.title) : json()},
              {"paragraphs", d.paragraphs},
              {"cluster", d.gold_label ? json(*d.gold_label) : json()}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void SaveCorpus(std::span<const DocumentInput> docs,
                const std::filesystem::path& path) {
  internal::WriteFile(path, FormatCorpus(docs));
}

DocRepr BuildRepr(const std::optional<DenseVec>& title_vec,
                  const DenseVec& fp_vec, std::span<const DenseVec> para_vecs,
                  DayTimestamp ts) {
  if (para_vecs.empty()) {
    throw ValidationError("representation needs at least one paragraph");
  }
  for (const DenseVec& p : para_vecs) CheckSameDim(fp_vec, p, "build_repr");
  if (title_vec) CheckSameDim(fp_vec, *title_vec, "build_repr");

  DocRepr r;
  r.ts = ts;
  r.d2 = fp_vec;
  if (title_vec) {
    const DenseVec fp_title[] = {fp_vec, *title_vec};
    r.d3 = Mean(fp_title);
    std::vector<DenseVec> all(para_vecs.begin(), para_vecs.end());
    all.push_back(*title_vec);
    r.d1 = Mean(all);
  } else {
    r.d3 = fp_vec;
    r.d1 = Mean(para_vecs);
  }
  return r;
}

}  // namespace newsclust
