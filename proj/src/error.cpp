#include "dopt/error.hpp"

namespace dopt {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::degenerate_update: return "DegenerateUpdate";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::already_selected: return "AlreadySelected";
    case Errc::instance_too_large: return "InstanceTooLarge";
    case Errc::empty_heap: return "EmptyHeap";
    case Errc::stale_stamp_corruption: return "StaleStampCorruption";
    case Errc::degenerate_label_set: return "DegenerateLabelSet";
    case Errc::parse_error: return "ParseError";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::invalid_label: return "InvalidLabel";
    case Errc::io_error: return "IoError";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace dopt
