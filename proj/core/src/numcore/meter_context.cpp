#include "tapverify/numcore/meter_context.hpp"

#include <algorithm>
#include <utility>

#include "tapverify/numcore/tensor.hpp"

namespace tapverify::numcore {

std::size_t bytes_per_scalar(Precision precision) {
  return precision == Precision::kFloat32 ? 4 : 8;
}

namespace detail {

void AllocationLedger::acquire(std::uint64_t bytes) {
  if (!enabled) return;
  live += bytes;
  peak = std::max(peak, live);
}

void AllocationLedger::release(std::uint64_t bytes) {
  if (!enabled) return;
  live -= std::min(live, bytes);
}

}  // namespace detail

AllocationHandle::AllocationHandle(
    std::shared_ptr<detail::AllocationLedger> ledger, std::uint64_t bytes)
    : ledger_(std::move(ledger)), bytes_(bytes) {
  if (ledger_) ledger_->acquire(bytes_);
}

AllocationHandle::AllocationHandle(const AllocationHandle& other)
    : ledger_(other.ledger_), bytes_(other.bytes_) {
  if (ledger_) ledger_->acquire(bytes_);
}

AllocationHandle& AllocationHandle::operator=(const AllocationHandle& other) {
  if (this == &other) return *this;
  reset();
  ledger_ = other.ledger_;
  bytes_ = other.bytes_;
  if (ledger_) ledger_->acquire(bytes_);
  return *this;
}

AllocationHandle::AllocationHandle(AllocationHandle&& other) noexcept
    : ledger_(std::move(other.ledger_)), bytes_(other.bytes_) {
  other.bytes_ = 0;
}

AllocationHandle& AllocationHandle::operator=(AllocationHandle&& other) noexcept {
  if (this == &other) return *this;
  reset();
  ledger_ = std::move(other.ledger_);
  bytes_ = other.bytes_;
  other.bytes_ = 0;
  return *this;
}

AllocationHandle::~AllocationHandle() { reset(); }

void AllocationHandle::reset() {
  if (ledger_) ledger_->release(bytes_);
  ledger_.reset();
  bytes_ = 0;
}

MeterContext::MeterContext(Precision precision, bool enabled)
    : precision_(precision),
      enabled_(enabled),
      ledger_(std::make_shared<detail::AllocationLedger>()) {
  ledger_->enabled = enabled;
}

MeterContext MeterContext::disabled(Precision precision) {
  return MeterContext(precision, false);
}

void MeterContext::add_flops(std::uint64_t flops) {
  if (enabled_) flops_ += flops;
}

void MeterContext::reset_peak() { ledger_->peak = ledger_->live; }

void MeterContext::track(Tensor& tensor) const {
  if (!enabled_) return;
  tensor.attach(ledger_, bytes_per_scalar(precision_));
}

}  // namespace tapverify::numcore
