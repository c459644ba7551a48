#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cwnnk {

// Base for every error the engine raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed arguments that violate an operation's precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

// A node whose NNK solve produced no surviving weight.
class DegenerateInputError : public Error {
 public:
  DegenerateInputError(std::size_t node, const std::string& what)
      : Error("node " + std::to_string(node) + ": " + what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

// State-machine misuse (reporting a frozen channel, non-monotone steps).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed snapshot bytes. offset is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(std::uint64_t offset, const std::string& what)
      : Error("format error at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// Well-formed snapshot carrying unusable values.
class DataError : public Error {
 public:
  using Location = std::pair<std::uint32_t, std::uint32_t>;  // (channel, row)

  DataError(const std::string& what, std::vector<Location> locations = {})
      : Error(what), locations_(std::move(locations)) {}
  const std::vector<Location>& locations() const noexcept { return locations_; }

 private:
  std::vector<Location> locations_;
};

}  // namespace cwnnk
