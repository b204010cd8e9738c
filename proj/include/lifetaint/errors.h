/*
 * Copyright The lifetaint Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <stdexcept>
#include <string>

namespace lifetaint {

/// Raised when an input file cannot be read or does not match its schema.
class LoadError : public std::runtime_error {
 public:
  explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a loaded document is well formed but internally inconsistent
/// (dangling references, duplicate names, bad arity).
class ValidationError : public LoadError {
 public:
  explicit ValidationError(const std::string& what) : LoadError(what) {}
};

/// A life-cycle machine that cannot make progress (e.g. a transient state
/// with no transition for the current event).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Errors raised while interpreting app code: undeclared registers,
/// unresolvable operands.
class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& what)
      : std::runtime_error(what) {}
};

} // namespace lifetaint
