#pragma once

#include <stdexcept>
#include <string>

namespace loboost {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LOBOOST_DEFINE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(#Name ": " + what) {}         \
  }

LOBOOST_DEFINE_ERROR(IoError);
LOBOOST_DEFINE_ERROR(ParseError);
LOBOOST_DEFINE_ERROR(SchemaError);
LOBOOST_DEFINE_ERROR(ConfigError);
LOBOOST_DEFINE_ERROR(DimensionError);
LOBOOST_DEFINE_ERROR(IndexError);
LOBOOST_DEFINE_ERROR(EmptyInput);
LOBOOST_DEFINE_ERROR(EmptyScores);
LOBOOST_DEFINE_ERROR(EmptyRegion);
LOBOOST_DEFINE_ERROR(SupportError);
LOBOOST_DEFINE_ERROR(InsufficientData);
LOBOOST_DEFINE_ERROR(LengthMismatch);
LOBOOST_DEFINE_ERROR(DivisionByZero);

#undef LOBOOST_DEFINE_ERROR

}  // namespace loboost
