#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dopt {

enum class Errc {
  not_positive_definite,
  degenerate_update,
  index_out_of_range,
  already_selected,
  instance_too_large,
  empty_heap,
  stale_stamp_corruption,
  degenerate_label_set,
  parse_error,
  dimension_mismatch,
  invalid_label,
  io_error,
  invalid_config,
};

std::string_view errc_name(Errc code) noexcept;

// Single exception type for the library; the code drives the C API status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dopt
