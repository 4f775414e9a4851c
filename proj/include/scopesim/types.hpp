/*
 * Copyright 2026 The scopesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file types.hpp
 * @brief Shared vocabulary of the simulator: addresses, scopes, orderings and
 *        the MemoryOp unit scheduled by the engine.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scopesim {

using Tick = std::uint64_t;
using CuId = std::uint32_t;

struct Address {
  std::uint64_t value = 0;
  auto operator<=>(const Address&) const = default;
};

struct BlockAddr {
  std::uint64_t value = 0;
  auto operator<=>(const BlockAddr&) const = default;
};

/// Truncating division of a byte address by a power-of-two block size.
BlockAddr block_of(Address addr, std::uint32_t block_size);

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// Synchronization scopes, totally ordered from narrowest to widest.
enum class Scope : std::uint8_t { WorkItem = 0, Wave = 1, WorkGroup = 2, Device = 3, System = 4 };

enum class Ordering : std::uint8_t { Relaxed, Acquire, Release, AcqRel };

enum class OpKind : std::uint8_t { Load, Store, AtomicLoad, AtomicStore, AtomicCAS, AtomicAdd };

/// WorkItem/Wave/WorkGroup execute at L1; Device/System at L2 (single device model).
inline bool is_local_scope(Scope s) { return s <= Scope::WorkGroup; }

inline bool has_acquire(Ordering o) { return o == Ordering::Acquire || o == Ordering::AcqRel; }
inline bool has_release(Ordering o) { return o == Ordering::Release || o == Ordering::AcqRel; }

inline bool is_atomic(OpKind k) { return k != OpKind::Load && k != OpKind::Store; }

std::string_view to_string(Scope s);
std::string_view to_string(Ordering o);
std::string_view to_string(OpKind k);

struct Issuer {
  CuId cu = 0;
  std::uint32_t work_group = 0;
  std::uint32_t work_item = 0;
  auto operator<=>(const Issuer&) const = default;
};

class InvalidMemoryOp : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * One load, store or atomic. Construction validates every invariant, so a
 * MemoryOp that exists is well formed:
 *  - plain Load/Store are Relaxed and never remote
 *  - remote ops carry a non-Relaxed ordering and Device scope
 *  - atomics are naturally aligned and 4 or 8 bytes wide
 */
class MemoryOp {
 public:
  static MemoryOp load(Address addr, std::uint32_t size, Issuer issuer = {});
  static MemoryOp store(Address addr, std::uint64_t value, std::uint32_t size, Issuer issuer = {});
  static MemoryOp atomic(OpKind kind, Address addr, Ordering ordering, Scope scope, bool remote,
                         std::uint64_t value = 0, std::uint64_t expected = 0,
                         std::uint32_t size = 8, Issuer issuer = {});

  OpKind kind() const { return kind_; }
  Address addr() const { return addr_; }
  std::uint32_t size() const { return size_; }
  /// Store value, CAS new value, or add delta.
  std::uint64_t value() const { return value_; }
  /// CAS expected value.
  std::uint64_t expected() const { return expected_; }
  Ordering ordering() const { return ordering_; }
  Scope scope() const { return scope_; }
  bool remote() const { return remote_; }
  const Issuer& issuer() const { return issuer_; }

  bool atomic() const { return is_atomic(kind_); }
  bool writes() const { return kind_ != OpKind::Load && kind_ != OpKind::AtomicLoad; }

  /// Copies with one field replaced; the copy is validated again.
  MemoryOp with_scope(Scope scope, bool remote) const;
  MemoryOp with_ordering(Ordering ordering) const;
  MemoryOp with_issuer(Issuer issuer) const;
  MemoryOp with_operands(std::uint64_t value, std::uint64_t expected) const;

  std::string describe() const;

  bool operator==(const MemoryOp&) const = default;

 private:
  MemoryOp() = default;
  void validate() const;

  OpKind kind_ = OpKind::Load;
  Address addr_{};
  std::uint32_t size_ = 8;
  std::uint64_t value_ = 0;
  std::uint64_t expected_ = 0;
  Ordering ordering_ = Ordering::Relaxed;
  Scope scope_ = Scope::WorkGroup;
  bool remote_ = false;
  Issuer issuer_{};
};

/// Read-modify-write semantics shared by every place an atomic executes.
struct AtomicOutcome {
  std::uint64_t old_value = 0;
  std::uint64_t new_value = 0;
  bool wrote = false;
};
AtomicOutcome apply_atomic(const MemoryOp& op, std::uint64_t current);

/// Truncates a value to an access size of 4 or 8 bytes.
inline std::uint64_t truncate_to(std::uint64_t v, std::uint32_t size) {
  return size >= 8 ? v : (v & ((std::uint64_t{1} << (8 * size)) - 1));
}

/// Thrown on conditions that can only arise from a protocol implementation bug.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace scopesim

template <>
struct std::hash<scopesim::Address> {
  std::size_t operator()(const scopesim::Address& a) const noexcept {
    return std::hash<std::uint64_t>{}(a.value);
  }
};

template <>
struct std::hash<scopesim::BlockAddr> {
  std::size_t operator()(const scopesim::BlockAddr& b) const noexcept {
    return std::hash<std::uint64_t>{}(b.value);
  }
};
