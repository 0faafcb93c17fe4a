#pragma once

#include <stdexcept>
#include <string>

namespace mmfnd {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define MMFND_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

// core
MMFND_DEFINE_ERROR(DuplicateIdError);
MMFND_DEFINE_ERROR(MissingImageError);

// ingestion
MMFND_DEFINE_ERROR(UnknownVeracityTagError);
MMFND_DEFINE_ERROR(MalformedRecordError);
MMFND_DEFINE_ERROR(SchemaMismatchError);
MMFND_DEFINE_ERROR(EncodingError);

// manipulation
MMFND_DEFINE_ERROR(EventNotInTextError);
MMFND_DEFINE_ERROR(EmptyPoolError);
MMFND_DEFINE_ERROR(EmptyTextAfterRemovalError);
MMFND_DEFINE_ERROR(UnknownIdError);
MMFND_DEFINE_ERROR(NotPendingError);
MMFND_DEFINE_ERROR(MissingCurationError);
MMFND_DEFINE_ERROR(EventMismatchError);

// encoding
MMFND_DEFINE_ERROR(UndecodableImageError);
MMFND_DEFINE_ERROR(EncoderUnavailableError);
MMFND_DEFINE_ERROR(CacheKeyMismatchError);

// fusion
MMFND_DEFINE_ERROR(DimMismatchError);
MMFND_DEFINE_ERROR(EmptySplitError);
MMFND_DEFINE_ERROR(NonFiniteLossError);
MMFND_DEFINE_ERROR(SequenceTooLongError);

// evaluation
MMFND_DEFINE_ERROR(LengthMismatchError);
MMFND_DEFINE_ERROR(EvenMemberCountError);
MMFND_DEFINE_ERROR(MisalignedIdsError);
MMFND_DEFINE_ERROR(MissingCacheError);

// pipeline
MMFND_DEFINE_ERROR(ConfigInvalidError);
MMFND_DEFINE_ERROR(StageFailedError);
MMFND_DEFINE_ERROR(MissingDerivedSplitError);
MMFND_DEFINE_ERROR(SpecInvalidError);

#undef MMFND_DEFINE_ERROR

}  // namespace mmfnd
