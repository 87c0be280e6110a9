#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

namespace tapverify::numcore {

enum class Precision { kFloat64, kFloat32 };

std::size_t bytes_per_scalar(Precision precision);

namespace detail {

struct AllocationLedger {
  std::uint64_t live = 0;
  std::uint64_t peak = 0;
  bool enabled = true;

  void acquire(std::uint64_t bytes);
  void release(std::uint64_t bytes);
};

}  // namespace detail

// RAII registration of one buffer with a ledger. Copies register a second
// buffer of the same size; moves transfer the registration.
class AllocationHandle {
 public:
  AllocationHandle() = default;
  AllocationHandle(std::shared_ptr<detail::AllocationLedger> ledger,
                   std::uint64_t bytes);
  AllocationHandle(const AllocationHandle& other);
  AllocationHandle& operator=(const AllocationHandle& other);
  AllocationHandle(AllocationHandle&& other) noexcept;
  AllocationHandle& operator=(AllocationHandle&& other) noexcept;
  ~AllocationHandle();

  std::uint64_t bytes() const { return bytes_; }
  bool attached() const { return ledger_ != nullptr; }
  void reset();

 private:
  std::shared_ptr<detail::AllocationLedger> ledger_;
  std::uint64_t bytes_ = 0;
};

class Tensor;

// Accumulates FLOPs and tracks live/peak bytes of every tensor a kernel
// produces. Not thread-safe: one context per concurrent execution.
class MeterContext {
 public:
  explicit MeterContext(Precision precision = Precision::kFloat64,
                        bool enabled = true);

  // Disabled contexts still enforce precision and finiteness but record
  // nothing; training inner loops use them.
  static MeterContext disabled(Precision precision = Precision::kFloat64);

  Precision precision() const { return precision_; }
  bool enabled() const { return enabled_; }

  void add_flops(std::uint64_t flops);
  std::uint64_t flops() const { return flops_; }
  std::uint64_t bytes_live() const { return ledger_->live; }
  std::uint64_t bytes_peak() const { return ledger_->peak; }

  // Starts a new peak window at the current live size.
  void reset_peak();

  // Registers `tensor` as a live allocation owned by this context.
  void track(Tensor& tensor) const;

 private:
  Precision precision_;
  bool enabled_;
  std::uint64_t flops_ = 0;
  std::shared_ptr<detail::AllocationLedger> ledger_;
};

}  // namespace tapverify::numcore
