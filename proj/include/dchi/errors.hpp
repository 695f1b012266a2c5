#ifndef DCHI_ERRORS_HPP
#define DCHI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dchi {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed embedding text file. line() is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DuplicateWordError : public Error {
 public:
  using Error::Error;
};

// Cache file with unknown magic or format version.
class CacheFormatError : public Error {
 public:
  using Error::Error;
};

// Cache file truncated or otherwise unreadable past the header.
class CacheCorruptError : public Error {
 public:
  using Error::Error;
};

class WordNotFoundError : public Error {
 public:
  explicit WordNotFoundError(const std::string& word)
      : Error("word not in vocabulary: '" + word + "'"), word_(word) {}
  const std::string& word() const { return word_; }

 private:
  std::string word_;
};

// Out-of-vocabulary token hit under OovPolicy::kError; carries the position.
class OovError : public Error {
 public:
  OovError(const std::string& token, std::size_t position)
      : Error("out-of-vocabulary token '" + token + "' at position " +
              std::to_string(position)),
        token_(token),
        position_(position) {}
  const std::string& token() const { return token_; }
  std::size_t position() const { return position_; }

 private:
  std::string token_;
  std::size_t position_;
};

}  // namespace dchi

#endif  // DCHI_ERRORS_HPP
