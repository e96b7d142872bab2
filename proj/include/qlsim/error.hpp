#pragma once

#include <stdexcept>
#include <string>

namespace qlsim {

// Exit codes used by the CLI; every library error maps onto one of them.
enum class ErrorKind { algorithmic = 1, input = 2, resource = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class AlgorithmError : public Error {
 public:
  explicit AlgorithmError(const std::string& what) : Error(ErrorKind::algorithmic, what) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& what) : Error(ErrorKind::resource, what) {}
};

}  // namespace qlsim
