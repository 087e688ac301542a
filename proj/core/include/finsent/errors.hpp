#pragma once

#include <stdexcept>
#include <string>

namespace finsent {

// Error categories double as CLI exit codes (0 = success, 1 = unexpected).
enum class ErrorCategory : int {
  Config = 2,
  Data = 3,
  Training = 4,
  Evaluation = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define FINSENT_ERROR_TYPE(Name, Category)                     \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& message)                  \
        : Error(ErrorCategory::Category, #Name ": " + message) {} \
  }

// corpus
FINSENT_ERROR_TYPE(ParseError, Data);
FINSENT_ERROR_TYPE(RangeError, Data);
FINSENT_ERROR_TYPE(EmptyFieldError, Data);
FINSENT_ERROR_TYPE(InsufficientDataError, Data);

// embeddings
FINSENT_ERROR_TYPE(FormatError, Data);
FINSENT_ERROR_TYPE(DuplicateWordError, Data);
FINSENT_ERROR_TYPE(UnknownWordError, Data);
FINSENT_ERROR_TYPE(DimensionMismatchError, Data);

// svr / blstm training
FINSENT_ERROR_TYPE(NonFiniteError, Training);
FINSENT_ERROR_TYPE(EmptyDatasetError, Training);
FINSENT_ERROR_TYPE(EmptyBatchError, Training);
FINSENT_ERROR_TYPE(CacheMismatchError, Training);
FINSENT_ERROR_TYPE(TrainingError, Training);

// eval
FINSENT_ERROR_TYPE(NoAnswersError, Evaluation);
FINSENT_ERROR_TYPE(MissingPredictionError, Evaluation);
FINSENT_ERROR_TYPE(EvaluationError, Evaluation);

// cli / configuration
FINSENT_ERROR_TYPE(ConfigError, Config);
FINSENT_ERROR_TYPE(DataError, Data);
FINSENT_ERROR_TYPE(VocabularyMismatchError, Data);

#undef FINSENT_ERROR_TYPE

}  // namespace finsent
