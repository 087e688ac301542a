#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace finsent {

// One (sentence, company, gold score) triple; the unit of prediction.
struct HeadlineInstance {
  std::string id;
  std::string company;
  std::string sentence;
  std::optional<double> gold_score;  // in [-1, 1] when present
};

// Instances sharing one canonicalized sentence. The same sentence occurs
// once per company mentioned, so evaluation and fold splitting treat the
// group as atomic.
struct SentenceGroup {
  std::string sentence_key;
  std::vector<std::string> members;  // instance ids, sorted
};

struct FoldAssignment {
  int k = 0;
  std::unordered_map<std::string, int> assignment;  // sentence_key -> fold
};

enum class DatasetFormat { Json, Csv };

// NFC normalization + whitespace trim; case-sensitive.
std::string canonical_sentence_key(std::string_view sentence);

// Unknown JSON keys are rejected unless strict is false.
std::vector<HeadlineInstance> load_dataset(const std::string& path,
                                           DatasetFormat format,
                                           bool strict = true);

std::vector<HeadlineInstance> parse_dataset_json(std::string_view text,
                                                 bool strict = true);
std::vector<HeadlineInstance> parse_dataset_csv(std::string_view text);

std::string dataset_to_json(const std::vector<HeadlineInstance>& instances);
void save_dataset_json(const std::string& path,
                       const std::vector<HeadlineInstance>& instances);

// Groups keyed by canonical_sentence_key, in first-appearance order;
// members sorted by id.
std::vector<SentenceGroup> group_by_sentence(
    const std::vector<HeadlineInstance>& instances);

// Deterministic for a fixed seed; fold sizes differ by at most one group.
FoldAssignment kfold_split(const std::vector<SentenceGroup>& groups, int k,
                           std::uint64_t seed);

}  // namespace finsent
