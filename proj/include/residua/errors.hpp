#pragma once

#include <stdexcept>
#include <string>

namespace residua {

/// Base class of all engine errors; `kind()` is a stable identifier used in reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define RESIDUA_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

RESIDUA_DEFINE_ERROR(OverlapError);
RESIDUA_DEFINE_ERROR(DimensionMismatch);
RESIDUA_DEFINE_ERROR(DegenerateStep);
RESIDUA_DEFINE_ERROR(EmptyProduct);
RESIDUA_DEFINE_ERROR(DerivativeOfIndicator);
RESIDUA_DEFINE_ERROR(NonMonomialStep);
RESIDUA_DEFINE_ERROR(NonBetaProfile);
RESIDUA_DEFINE_ERROR(NotReducible);
RESIDUA_DEFINE_ERROR(NonPositiveWeight);
RESIDUA_DEFINE_ERROR(DegenerateFit);
RESIDUA_DEFINE_ERROR(ZeroSection);
RESIDUA_DEFINE_ERROR(OnZeroSet);
RESIDUA_DEFINE_ERROR(RankTooLarge);
RESIDUA_DEFINE_ERROR(DegreeMismatch);
RESIDUA_DEFINE_ERROR(SchemaError);
RESIDUA_DEFINE_ERROR(ParseError);
RESIDUA_DEFINE_ERROR(IoError);

#undef RESIDUA_DEFINE_ERROR

}  // namespace residua
