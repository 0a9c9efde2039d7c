// Shared error types, seeded randomness and content hashing.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace unlearn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised by model backends: unknown question, out-of-vocabulary token,
/// missing capability, incompatible vocabularies.
class BackendError : public Error {
 public:
  using Error::Error;
};

class JudgeUnavailableError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class UndefinedScoreError : public Error {
 public:
  using Error::Error;
};

/// Seeded random source. Built on mt19937_64, whose output sequence is fixed
/// by the standard; the derived draws below avoid the implementation-defined
/// std distributions so that runs replay identically across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a(std::string_view bytes);

/// Derives an independent stream seed from a run seed and a key
/// (individual name, epoch tag, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

std::string hex64(std::uint64_t value);

/// FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Whitespace-delimited word count.
std::size_t word_count(std::string_view text);

}  // namespace unlearn
