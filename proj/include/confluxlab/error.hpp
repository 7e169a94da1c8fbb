/*
 Copyright 2026 The ConfluxLab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <stdexcept>
#include <string>

namespace confluxlab {

/// Error categories double as CLI exit codes.
enum class ErrorKind : int {
    Parse = 2,
    Domain = 3,
    ResourceCap = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& msg)
        : Error(ErrorKind::Parse, std::to_string(line) + ":" + std::to_string(column) +
                                      ": " + msg),
          line_(line), column_(column), message_(msg) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    int line_;
    int column_;
    std::string message_;
};

/// Numeric failures and violated preconditions on values (divisibility,
/// singular pivots, non-SPD input, invalid grids, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

/// Refusal to run because a configured hard cap would be exceeded.
class CapExceeded : public Error {
public:
    explicit CapExceeded(const std::string& what) : Error(ErrorKind::ResourceCap, what) {}
};

}  // namespace confluxlab
