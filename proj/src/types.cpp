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

#include "scopesim/types.hpp"

#include <sstream>

namespace scopesim {

BlockAddr block_of(Address addr, std::uint32_t block_size) {
  return BlockAddr{addr.value / block_size};
}

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::WorkItem: return "wi";
    case Scope::Wave: return "wv";
    case Scope::WorkGroup: return "wg";
    case Scope::Device: return "cmp";
    case Scope::System: return "sys";
  }
  return "?";
}

std::string_view to_string(Ordering o) {
  switch (o) {
    case Ordering::Relaxed: return "rlx";
    case Ordering::Acquire: return "acq";
    case Ordering::Release: return "rel";
    case Ordering::AcqRel: return "ar";
  }
  return "?";
}

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::Load: return "ld";
    case OpKind::Store: return "st";
    case OpKind::AtomicLoad: return "atomic_ld";
    case OpKind::AtomicStore: return "atomic_st";
    case OpKind::AtomicCAS: return "atomic_cas";
    case OpKind::AtomicAdd: return "atomic_add";
  }
  return "?";
}

MemoryOp MemoryOp::load(Address addr, std::uint32_t size, Issuer issuer) {
  MemoryOp op;
  op.kind_ = OpKind::Load;
  op.addr_ = addr;
  op.size_ = size;
  op.issuer_ = issuer;
  op.validate();
  return op;
}

MemoryOp MemoryOp::store(Address addr, std::uint64_t value, std::uint32_t size, Issuer issuer) {
  MemoryOp op;
  op.kind_ = OpKind::Store;
  op.addr_ = addr;
  op.size_ = size;
  op.value_ = truncate_to(value, size);
  op.issuer_ = issuer;
  op.validate();
  return op;
}

MemoryOp MemoryOp::atomic(OpKind kind, Address addr, Ordering ordering, Scope scope, bool remote,
                          std::uint64_t value, std::uint64_t expected, std::uint32_t size,
                          Issuer issuer) {
  MemoryOp op;
  op.kind_ = kind;
  op.addr_ = addr;
  op.ordering_ = ordering;
  op.scope_ = scope;
  op.remote_ = remote;
  op.size_ = size;
  op.value_ = truncate_to(value, size);
  op.expected_ = truncate_to(expected, size);
  op.issuer_ = issuer;
  op.validate();
  return op;
}

void MemoryOp::validate() const {
  if (size_ == 0 || size_ > 8) throw InvalidMemoryOp("access size must be 1..8 bytes");
  if (!is_atomic(kind_)) {
    if (ordering_ != Ordering::Relaxed) throw InvalidMemoryOp("plain load/store must be relaxed");
    if (remote_) throw InvalidMemoryOp("plain load/store cannot be remote");
    return;
  }
  if (size_ != 4 && size_ != 8) throw InvalidMemoryOp("atomic size must be 4 or 8 bytes");
  if (addr_.value % size_ != 0) throw InvalidMemoryOp("atomic address must be naturally aligned");
  if (remote_) {
    if (ordering_ == Ordering::Relaxed) throw InvalidMemoryOp("remote op must not be relaxed");
    if (scope_ != Scope::Device) throw InvalidMemoryOp("remote op must have device scope");
  }
}

MemoryOp MemoryOp::with_scope(Scope scope, bool remote) const {
  MemoryOp op = *this;
  op.scope_ = scope;
  op.remote_ = remote;
  op.validate();
  return op;
}

MemoryOp MemoryOp::with_ordering(Ordering ordering) const {
  MemoryOp op = *this;
  op.ordering_ = ordering;
  op.validate();
  return op;
}

MemoryOp MemoryOp::with_issuer(Issuer issuer) const {
  MemoryOp op = *this;
  op.issuer_ = issuer;
  return op;
}

MemoryOp MemoryOp::with_operands(std::uint64_t value, std::uint64_t expected) const {
  MemoryOp op = *this;
  op.value_ = truncate_to(value, size_);
  op.expected_ = truncate_to(expected, size_);
  return op;
}

std::string MemoryOp::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  if (atomic()) {
    os << '_' << (remote_ ? "rm_" : "") << to_string(ordering_) << '_' << to_string(scope_);
  }
  os << " 0x" << std::hex << addr_.value << std::dec;
  switch (kind_) {
    case OpKind::Store:
    case OpKind::AtomicStore:
    case OpKind::AtomicAdd: os << ' ' << value_; break;
    case OpKind::AtomicCAS: os << ' ' << expected_ << "->" << value_; break;
    default: break;
  }
  return os.str();
}

AtomicOutcome apply_atomic(const MemoryOp& op, std::uint64_t current) {
  AtomicOutcome out;
  out.old_value = current;
  out.new_value = current;
  switch (op.kind()) {
    case OpKind::Load:
    case OpKind::AtomicLoad: break;
    case OpKind::Store:
    case OpKind::AtomicStore:
      out.new_value = op.value();
      out.wrote = true;
      break;
    case OpKind::AtomicCAS:
      if (current == op.expected()) {
        out.new_value = op.value();
        out.wrote = true;
      }
      break;
    case OpKind::AtomicAdd:
      out.new_value = truncate_to(current + op.value(), op.size());
      out.wrote = true;
      break;
  }
  return out;
}

}  // namespace scopesim
