#include "finsent/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "finsent/errors.hpp"
#include "finsent/rng.hpp"
#include "finsent/unicode.hpp"
#include "json.hpp"

namespace finsent {
namespace {

using nlohmann::json;

std::string trim_unicode(std::string_view s) {
  auto cps = unicode::decode_utf8(s);
  std::size_t b = 0, e = cps.size();
  while (b < e && unicode::is_space(cps[b])) ++b;
  while (e > b && unicode::is_space(cps[e - 1])) --e;
  return unicode::encode_utf8({cps.begin() + b, cps.begin() + e});
}

void validate_instance(HeadlineInstance& inst, std::size_t record_index) {
  auto where = [&] { return " (record " + std::to_string(record_index) + ")"; };
  if (inst.id.empty()) throw EmptyFieldError("empty id" + where());
  if (trim_unicode(inst.sentence).empty())
    throw EmptyFieldError("sentence is empty after trimming" + where());
  if (inst.company.empty()) throw EmptyFieldError("empty company" + where());
  if (inst.gold_score) {
    double y = *inst.gold_score;
    if (!std::isfinite(y) || y < -1.0 || y > 1.0)
      throw RangeError("sentiment " + std::to_string(y) +
                       " outside [-1, 1]" + where());
  }
}

void check_unique_ids(const std::vector<HeadlineInstance>& instances) {
  std::unordered_set<std::string> seen;
  for (const auto& inst : instances) {
    if (!seen.insert(inst.id).second)
      throw ParseError("duplicate instance id '" + inst.id + "'");
  }
}

// RFC-4180 field splitter. Returns rows of fields; quoted fields may
// contain commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      field.push_back(c);
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !field_started) {
          in_quotes = true;
        } else {
          field.push_back(c);
        }
        field_started = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_row();
        ++i;
        break;
      default:
        field.push_back(c);
        field_started = true;
        ++i;
        break;
    }
  }
  if (field_started || !row.empty()) end_row();
  return rows;
}

}  // namespace

std::string canonical_sentence_key(std::string_view sentence) {
  return trim_unicode(unicode::nfc(sentence));
}

std::vector<HeadlineInstance> parse_dataset_json(std::string_view text,
                                                 bool strict) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("top-level value must be an array");

  static const std::unordered_set<std::string> known_keys = {
      "id", "company", "sentence", "sentiment"};

  std::vector<HeadlineInstance> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    auto where = " (record " + std::to_string(i) + ")";
    if (!rec.is_object()) throw ParseError("record is not an object" + where);
    if (strict) {
      for (auto it = rec.begin(); it != rec.end(); ++it) {
        if (!known_keys.count(it.key()))
          throw ParseError("unknown key '" + it.key() + "'" + where);
      }
    }
    HeadlineInstance inst;
    for (const char* key : {"id", "company", "sentence"}) {
      if (!rec.contains(key) || !rec[key].is_string())
        throw ParseError(std::string("missing or non-string '") + key + "'" +
                         where);
    }
    inst.id = rec["id"].get<std::string>();
    inst.company = rec["company"].get<std::string>();
    inst.sentence = rec["sentence"].get<std::string>();
    if (rec.contains("sentiment")) {
      if (!rec["sentiment"].is_number())
        throw ParseError("'sentiment' is not a number" + where);
      inst.gold_score = rec["sentiment"].get<double>();
    }
    validate_instance(inst, i);
    out.push_back(std::move(inst));
  }
  check_unique_ids(out);
  return out;
}

std::vector<HeadlineInstance> parse_dataset_csv(std::string_view text) {
  auto rows = parse_csv_rows(text);
  if (rows.empty()) throw ParseError("empty CSV file");
  const std::vector<std::string> header = {"id", "company", "sentence",
                                           "sentiment"};
  if (rows[0] != header)
    throw ParseError("CSV header must be 'id,company,sentence,sentiment'");

  std::vector<HeadlineInstance> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto where = " (record " + std::to_string(r - 1) + ")";
    if (row.size() != 4)
      throw ParseError("expected 4 fields, got " + std::to_string(row.size()) +
                       where);
    HeadlineInstance inst;
    inst.id = row[0];
    inst.company = row[1];
    inst.sentence = row[2];
    if (!row[3].empty()) {
      try {
        std::size_t pos = 0;
        inst.gold_score = std::stod(row[3], &pos);
        if (pos != row[3].size()) throw std::invalid_argument(row[3]);
      } catch (const std::exception&) {
        throw ParseError("bad sentiment value '" + row[3] + "'" + where);
      }
    }
    validate_instance(inst, r - 1);
    out.push_back(std::move(inst));
  }
  check_unique_ids(out);
  return out;
}

std::vector<HeadlineInstance> load_dataset(const std::string& path,
                                           DatasetFormat format, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return format == DatasetFormat::Json ? parse_dataset_json(buf.str(), strict)
                                       : parse_dataset_csv(buf.str());
}

std::string dataset_to_json(const std::vector<HeadlineInstance>& instances) {
  json arr = json::array();
  for (const auto& inst : instances) {
    json rec = {{"id", inst.id},
                {"company", inst.company},
                {"sentence", inst.sentence}};
    if (inst.gold_score) rec["sentiment"] = *inst.gold_score;
    arr.push_back(std::move(rec));
  }
  return arr.dump(2) + "\n";
}

void save_dataset_json(const std::string& path,
                       const std::vector<HeadlineInstance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << dataset_to_json(instances);
}

std::vector<SentenceGroup> group_by_sentence(
    const std::vector<HeadlineInstance>& instances) {
  std::vector<SentenceGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& inst : instances) {
    std::string key = canonical_sentence_key(inst.sentence);
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) groups.push_back({std::move(key), {}});
    groups[it->second].members.push_back(inst.id);
  }
  for (auto& g : groups) std::sort(g.members.begin(), g.members.end());
  return groups;
}

FoldAssignment kfold_split(const std::vector<SentenceGroup>& groups, int k,
                           std::uint64_t seed) {
  if (k < 2) throw InsufficientDataError("fold count must be >= 2");
  if (groups.size() < static_cast<std::size_t>(k))
    throw InsufficientDataError(std::to_string(groups.size()) +
                                " sentence groups for k=" + std::to_string(k));
  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  FoldAssignment folds;
  folds.k = k;
  for (std::size_t i = 0; i < order.size(); ++i)
    folds.assignment[groups[order[i]].sentence_key] = static_cast<int>(i % k);
  return folds;
}

}  // namespace finsent
