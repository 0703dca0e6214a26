#ifndef CITEREC_ERROR_HPP
#define CITEREC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace citerec {

enum class ErrorKind {
  xml_parse,      // malformed XML input (message carries byte offset)
  invalid_input,  // structurally valid input violating a contract
  missing_text,   // paper has neither abstract nor body text
  out_of_range,   // year outside the configured corpus bounds
  shape_mismatch, // tensor/parameter shape disagreement
  numeric,        // non-finite values, undefined kappa, divergence
  lookup,         // unresolvable identifier
  shortage,       // not enough candidates to fill a negative sample
  label,          // label outside the configured class order
  alignment,      // prediction sets cover different pair sets
  insufficient,   // not enough eligible queries for a split
  io,             // file system failure
  config,         // bad configuration file or flag value
  stage,          // experiment stage failure (message names the stage)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace citerec

#endif
