#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace loopchart {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
      : Error(what), offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class StateExplosion : public Error {
 public:
  using Error::Error;
};

class AmbiguousMarking : public Error {
 public:
  using Error::Error;
};

class UnknownVertex : public Error {
 public:
  explicit UnknownVertex(std::size_t v)
      : Error("unknown vertex " + std::to_string(v)), vertex_(v) {}
  std::size_t vertex() const noexcept { return vertex_; }

 private:
  std::size_t vertex_;
};

class EmptyEntrySet : public Error {
 public:
  EmptyEntrySet() : Error("entry set is empty") {}
};

class SearchBudgetExceeded : public Error {
 public:
  explicit SearchBudgetExceeded(std::size_t budget)
      : Error("LEE search budget of " + std::to_string(budget) + " nodes exceeded"),
        budget_(budget) {}
  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t budget_;
};

class TraceReplayError : public Error {
 public:
  TraceReplayError(std::size_t step, const std::string& why)
      : Error("trace step " + std::to_string(step) + ": " + why), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& why)
      : Error(pointer + ": " + why), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

class CapExceeded : public Error {
 public:
  CapExceeded(std::size_t size, std::size_t cap)
      : Error("combined size " + std::to_string(size) + " exceeds cap " + std::to_string(cap)) {}
};

}  // namespace loopchart
