// Copyright 2026 The probcbma Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace probcbma {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Errors tied to a position in a source file (programs, queries, TSV data).
class SourceError : public Error {
 public:
  SourceError(std::string message, int line, int column = 0, std::string file = {});

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& file() const { return file_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  int line_;
  int column_;
  std::string file_;
};

class ParseError : public SourceError {
 public:
  using SourceError::SourceError;
};

class ArityError : public SourceError {
 public:
  using SourceError::SourceError;
};

class ProbabilityRangeError : public SourceError {
 public:
  using SourceError::SourceError;
};

// Malformed rows in tabular input.
class DataError : public SourceError {
 public:
  using SourceError::SourceError;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class RecursionError : public ValidationError {
 public:
  explicit RecursionError(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

class UnsafeVariableError : public ValidationError {
 public:
  UnsafeVariableError(std::string variable, std::string rule, int line);
  const std::string& variable() const { return variable_; }

 private:
  std::string variable_;
};

class ChoiceSumError : public ValidationError {
 public:
  ChoiceSumError(std::string relation, double sum);
  double sum() const { return sum_; }

 private:
  double sum_;
};

// Relation/plan/table shapes that do not line up.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A query outside what the lifted compiler can turn into an extensional plan.
class UnsupportedQuery : public Error {
 public:
  using Error::Error;
};

class TooLargeError : public Error {
 public:
  using Error::Error;
};

class ZeroConditionError : public Error {
 public:
  using Error::Error;
};

class NoMatchingStudies : public Error {
 public:
  using Error::Error;
};

class RejectionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace probcbma
