// rfa/error.cc

#include "rfa/error.h"

namespace rfa {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kFileNotFound: return "file not found";
    case Errc::kMalformedHeader: return "malformed header";
    case Errc::kUnsupportedFormat: return "unsupported format";
    case Errc::kSilentClip: return "silent clip";
    case Errc::kTooShort: return "input too short";
    case Errc::kInsufficientVoicing: return "insufficient voicing";
    case Errc::kFlatWindow: return "flat window";
    case Errc::kOutOfRange: return "out of range";
    case Errc::kEmptyInput: return "empty input";
    case Errc::kMissingColumn: return "missing column";
    case Errc::kDuplicateId: return "duplicate id";
    case Errc::kSingleClass: return "single class";
    case Errc::kNonFinite: return "non-finite value";
    case Errc::kDimensionMismatch: return "dimension mismatch";
    case Errc::kDegenerateFolds: return "degenerate folds";
    case Errc::kInvalidArgument: return "invalid argument";
    case Errc::kIo: return "i/o error";
  }
  return "unknown";
}

}  // namespace rfa
