#pragma once

#include <stdexcept>
#include <string>

namespace signet {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define SIGNET_DEFINE_ERROR(name)                                             \
  class name : public Error {                                                 \
  public:                                                                      \
    using Error::Error;                                                        \
  }

SIGNET_DEFINE_ERROR(FileNotFoundError);
SIGNET_DEFINE_ERROR(UnsupportedFormatError);
SIGNET_DEFINE_ERROR(IoError);
SIGNET_DEFINE_ERROR(BoxOutOfBoundsError);
SIGNET_DEFINE_ERROR(CapacityExceededError);
SIGNET_DEFINE_ERROR(UnsupportedSchemeError);
SIGNET_DEFINE_ERROR(MalformedKeyError);
SIGNET_DEFINE_ERROR(SchemeMismatchError);
SIGNET_DEFINE_ERROR(ZeroClassesError);
SIGNET_DEFINE_ERROR(EmptyDatasetError);
SIGNET_DEFINE_ERROR(LabelOutOfRangeError);
SIGNET_DEFINE_ERROR(SingleClassError);
SIGNET_DEFINE_ERROR(DuplicateImageError);
SIGNET_DEFINE_ERROR(EmptyTriggerSetError);
SIGNET_DEFINE_ERROR(SignatureCountMismatchError);
SIGNET_DEFINE_ERROR(DuplicateUserError);
SIGNET_DEFINE_ERROR(TooFewUsersError);
SIGNET_DEFINE_ERROR(AmbiguousAttributionError);
SIGNET_DEFINE_ERROR(UnsupportedConfigError);
SIGNET_DEFINE_ERROR(InvalidArgumentError);

#undef SIGNET_DEFINE_ERROR

} // namespace signet
