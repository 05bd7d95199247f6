#pragma once

#include <stdexcept>
#include <string>

namespace platoon {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : error {
  using error::error;
};

struct invalid_certificate_error : error {
  using error::error;
};

struct key_not_found_error : error {
  using error::error;
};

struct insufficient_horizon_error : error {
  using error::error;
};

struct numerical_error : error {
  using error::error;
};

}  // namespace platoon
