#pragma once

#include <stdexcept>
#include <string>

namespace assaygen {

/// Base class for all library errors. `kind()` is a stable machine-readable
/// tag; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define ASSAYGEN_DEFINE_ERROR(Name)                        \
  class Name : public Error {                              \
   public:                                                 \
    explicit Name(const std::string& message = "")         \
        : Error(#Name, message) {}                         \
  }

// bioassay-store
ASSAYGEN_DEFINE_ERROR(MissingAid);
ASSAYGEN_DEFINE_ERROR(MissingDescription);
ASSAYGEN_DEFINE_ERROR(NotFound);
ASSAYGEN_DEFINE_ERROR(UnknownOutcome);

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t index, const std::string& reason)
      : Error("MalformedRow",
              "row " + std::to_string(index) + ": " + reason),
        index_(index),
        reason_(reason) {}
  std::size_t index() const noexcept { return index_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t index_;
  std::string reason_;
};

// embedding-index
ASSAYGEN_DEFINE_ERROR(DimMismatch);
ASSAYGEN_DEFINE_ERROR(ZeroNorm);
ASSAYGEN_DEFINE_ERROR(EmptyIndex);
ASSAYGEN_DEFINE_ERROR(EmptySerialization);
ASSAYGEN_DEFINE_ERROR(IndexFormatError);

// llm-gateway
ASSAYGEN_DEFINE_ERROR(AuthError);
ASSAYGEN_DEFINE_ERROR(RateLimited);
ASSAYGEN_DEFINE_ERROR(Timeout);
ASSAYGEN_DEFINE_ERROR(NoObjectFound);

class ProviderError : public Error {
 public:
  ProviderError(int status, const std::string& body)
      : Error("ProviderError",
              "status " + std::to_string(status) + ": " + body),
        status_(status),
        body_(body) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }

 private:
  int status_;
  std::string body_;
};

class MissingKey : public Error {
 public:
  explicit MissingKey(const std::string& name)
      : Error("MissingKey", name), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// chem-core
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("SyntaxError",
              "at " + std::to_string(position) + ": " + message),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnclosedRing : public Error {
 public:
  explicit UnclosedRing(int digit)
      : Error("UnclosedRing", "ring bond " + std::to_string(digit)),
        digit_(digit) {}
  int digit() const noexcept { return digit_; }

 private:
  int digit_;
};

class ValenceError : public Error {
 public:
  ValenceError(int atom_index, const std::string& message)
      : Error("ValenceError",
              "atom " + std::to_string(atom_index) + ": " + message),
        atom_index_(atom_index) {}
  int atom_index() const noexcept { return atom_index_; }

 private:
  int atom_index_;
};

ASSAYGEN_DEFINE_ERROR(UnmatchedParen);
ASSAYGEN_DEFINE_ERROR(SizeMismatch);
ASSAYGEN_DEFINE_ERROR(TooFew);

// context-builder / generation-engine
ASSAYGEN_DEFINE_ERROR(EmptyRows);
ASSAYGEN_DEFINE_ERROR(NoUsableBlocks);
ASSAYGEN_DEFINE_ERROR(BatchSizeMismatch);
ASSAYGEN_DEFINE_ERROR(MissingPlaceholder);

// eval-harness
ASSAYGEN_DEFINE_ERROR(ToolNotFound);
ASSAYGEN_DEFINE_ERROR(ToolCrash);
ASSAYGEN_DEFINE_ERROR(UnparseableOutput);
ASSAYGEN_DEFINE_ERROR(Empty);
ASSAYGEN_DEFINE_ERROR(EmptyBaseline);
ASSAYGEN_DEFINE_ERROR(NoHighScoringContext);

// cli
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& field, const std::string& why = "")
      : Error("ConfigError", field + (why.empty() ? "" : ": " + why)),
        field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class MissingArtifact : public Error {
 public:
  explicit MissingArtifact(const std::string& command)
      : Error("MissingArtifact", "run '" + command + "' first"),
        command_(command) {}
  const std::string& command() const noexcept { return command_; }

 private:
  std::string command_;
};

#undef ASSAYGEN_DEFINE_ERROR

}  // namespace assaygen
