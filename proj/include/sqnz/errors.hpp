#pragma once

#include <stdexcept>
#include <string>

namespace sqnz {

// Input-side failures (bad files, configs, shapes). CLI maps these to exit code 1.
class input_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class parse_error : public input_error {
public:
  using input_error::input_error;
};

class validation_error : public input_error {
public:
  using input_error::input_error;
};

class format_error : public input_error {
public:
  using input_error::input_error;
};

class dimension_error : public input_error {
public:
  using input_error::input_error;
};

class architecture_error : public input_error {
public:
  using input_error::input_error;
};

class stratification_error : public input_error {
public:
  using input_error::input_error;
};

class encoding_error : public input_error {
public:
  using input_error::input_error;
};

// Failures while computing (non-finite values, integer overflow). Exit code 2.
class compute_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class numeric_error : public compute_error {
public:
  using compute_error::compute_error;
};

class range_error : public compute_error {
public:
  using compute_error::compute_error;
};

}  // namespace sqnz
