/*
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <stdexcept>
#include <string>

namespace opf {

// Input-data problems: unreadable or syntactically broken case text.
struct MalformedCase : std::runtime_error {
  explicit MalformedCase(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that violates model invariants (dangling bus
// references, empty bus table, v_min > v_max, ...).
struct InconsistentCase : std::runtime_error {
  explicit InconsistentCase(const std::string& what) : std::runtime_error(what) {}
};

struct NotHermitian : std::runtime_error {
  explicit NotHermitian(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Solver was asked for data that only an Optimal result carries.
struct NotOptimal : std::runtime_error {
  explicit NotOptimal(const std::string& what) : std::runtime_error(what) {}
};

// S* = C + sum(alpha_k A_k) came back indefinite beyond the repairable band.
struct NotPsdAfterShift : std::runtime_error {
  explicit NotPsdAfterShift(const std::string& what) : std::runtime_error(what) {}
};

struct MissingPair : std::runtime_error {
  explicit MissingPair(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyBox : std::runtime_error {
  explicit EmptyBox(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroWidthInterval : std::runtime_error {
  explicit ZeroWidthInterval(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyQueue : std::runtime_error {
  explicit EmptyQueue(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroUpperBound : std::runtime_error {
  explicit ZeroUpperBound(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalTrouble : std::runtime_error {
  explicit NumericalTrouble(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace opf
