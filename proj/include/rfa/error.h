// rfa/error.h

#ifndef RFA_ERROR_H_
#define RFA_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfa {

enum class Errc {
  kFileNotFound,
  kMalformedHeader,
  kUnsupportedFormat,
  kSilentClip,
  kTooShort,
  kInsufficientVoicing,
  kFlatWindow,
  kOutOfRange,
  kEmptyInput,
  kMissingColumn,
  kDuplicateId,
  kSingleClass,
  kNonFinite,
  kDimensionMismatch,
  kDegenerateFolds,
  kInvalidArgument,
  kIo,
};

std::string_view errc_name(Errc code);

// All library failures are reported through this type. what() carries a
// human readable message; code() lets callers branch on the failure kind.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rfa

#endif  // RFA_ERROR_H_
