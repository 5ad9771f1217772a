#pragma once

#include <stdexcept>
#include <string>

namespace spotattack {

/// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPOTATTACK_DEFINE_ERROR(Name)          \
  class Name : public Error {                  \
   public:                                     \
    using Error::Error;                        \
  }

// imaging
SPOTATTACK_DEFINE_ERROR(ShapeTooLarge);
SPOTATTACK_DEFINE_ERROR(PositionOutOfRange);
SPOTATTACK_DEFINE_ERROR(DimensionMismatch);
SPOTATTACK_DEFINE_ERROR(InvalidArgument);
SPOTATTACK_DEFINE_ERROR(IoError);

// classifier
SPOTATTACK_DEFINE_ERROR(ParseError);
SPOTATTACK_DEFINE_ERROR(ShapeMismatch);
SPOTATTACK_DEFINE_ERROR(UnknownLayerKind);
SPOTATTACK_DEFINE_ERROR(UnknownLabel);

// ga_search
SPOTATTACK_DEFINE_ERROR(EmptyPopulation);
SPOTATTACK_DEFINE_ERROR(LengthMismatch);

// cluster
SPOTATTACK_DEFINE_ERROR(EmptyList);

// attack
SPOTATTACK_DEFINE_ERROR(SourceMisclassified);
SPOTATTACK_DEFINE_ERROR(NoAttackableCharacter);

// metrics
SPOTATTACK_DEFINE_ERROR(NoCorrectlyClassifiedSources);

// dataset
SPOTATTACK_DEFINE_ERROR(UnknownCharacter);
SPOTATTACK_DEFINE_ERROR(InsufficientCorrectImages);

#undef SPOTATTACK_DEFINE_ERROR

}  // namespace spotattack
