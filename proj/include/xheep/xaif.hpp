// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xheep/bus.hpp"
#include "xheep/config.hpp"
#include "xheep/memory.hpp"
#include "xheep/power.hpp"
#include "xheep/sim.hpp"

namespace xheep {

enum class AccelState : std::uint8_t { Idle, Busy, Done };
std::string_view to_string(AccelState state);

/// Services a socket offers to the model plugged into it.
class AcceleratorContext {
 public:
  virtual ~AcceleratorContext() = default;
  virtual SimTime now() const = 0;
  virtual std::uint32_t slot() const = 0;
  /// Null when the index is out of range.
  virtual MemoryBank* bank(std::uint32_t index) = 0;
  /// The model changed state outside step(); the socket reschedules.
  virtual void wake() = 0;
};

/// Behavioral contract for accelerator models. Models are passive: the
/// socket advances them with step() only while their power domain is On.
class AcceleratorModel {
 public:
  virtual ~AcceleratorModel() = default;
  virtual std::string_view model_name() const = 0;

  virtual void bind(AcceleratorContext& context) = 0;
  virtual void reset() = 0;
  /// nullopt answers SlaveError.
  virtual std::optional<std::uint32_t> window_read(std::uint32_t offset) = 0;
  /// false answers SlaveError.
  virtual bool window_write(std::uint32_t offset, std::uint32_t value) = 0;
  /// Advances the model by `cycles` active cycles.
  virtual void step(SimTime cycles) = 0;
  virtual AccelState state() const = 0;
  /// Active cycles until the model's next state change; nullopt when it has none.
  virtual std::optional<SimTime> cycles_to_event() const = 0;
  /// Dynamic activity weight of the current busy period.
  virtual double intensity() const { return 1.0; }
};

/// Positive rational cycles per element, stored as num/den.
struct Rational {
  std::uint64_t num = 1;
  std::uint64_t den = 4;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  /// ceil(count * num / den)
  std::uint64_t ceil_mul(std::uint64_t count) const;
  bool operator==(const Rational&) const = default;
};

/// Q16.16 approximation used by the register interface.
Rational rational_from_double(double value, std::uint64_t den = 65536);

struct OffloadCommand {
  std::uint32_t kernel_id = 0;
  std::uint32_t element_count = 0;
  Rational cycles_per_element;
  double intensity = 1.0;
  std::uint32_t scale = 1;
  std::uint32_t add = 0;

  bool operator==(const OffloadCommand&) const = default;
};

namespace nmv {
inline constexpr std::uint32_t kCtrl = 0x00;
inline constexpr std::uint32_t kKernel = 0x04;
inline constexpr std::uint32_t kCount = 0x08;
inline constexpr std::uint32_t kCpeQ16 = 0x0C;
inline constexpr std::uint32_t kScale = 0x10;
inline constexpr std::uint32_t kAdd = 0x14;
inline constexpr std::uint32_t kIntensityQ16 = 0x18;

inline constexpr std::uint32_t kKernelTimed = 0;
/// In-place x = x * scale + add over 32-bit words from bank offset 0.
inline constexpr std::uint32_t kKernelScaleAdd = 1;

/// (offset, value) register writes for `cmd`, CTRL start last.
std::vector<std::pair<std::uint32_t, std::uint32_t>> command_writes(const OffloadCommand& cmd);
}  // namespace nmv

/// Reference near-memory vector unit embedded in one SRAM bank. While Busy the
/// bank is in ComputeMode; busy time is ceil(element_count * cycles_per_element).
class NearMemVector : public AcceleratorModel {
 public:
  explicit NearMemVector(std::uint32_t bank_index, Rational default_cpe = {1, 4});

  std::string_view model_name() const override { return "near-mem-vector"; }
  void bind(AcceleratorContext& context) override { ctx_ = &context; }
  void reset() override;
  std::optional<std::uint32_t> window_read(std::uint32_t offset) override;
  bool window_write(std::uint32_t offset, std::uint32_t value) override;
  void step(SimTime cycles) override;
  AccelState state() const override { return state_; }
  std::optional<SimTime> cycles_to_event() const override;
  double intensity() const override { return running_.intensity; }

  std::uint32_t bank_index() const { return bank_index_; }
  std::uint64_t offloads() const { return offloads_; }

 private:
  bool start();
  void complete();

  AcceleratorContext* ctx_ = nullptr;
  std::uint32_t bank_index_;
  Rational default_cpe_;
  OffloadCommand staged_;
  OffloadCommand running_;
  AccelState state_ = AccelState::Idle;
  SimTime remaining_ = 0;
  std::uint64_t offloads_ = 0;
};

using AcceleratorFactory = std::function<std::unique_ptr<AcceleratorModel>(const AcceleratorConfig&)>;

/// Models register by name; config entries pick them by that name.
class AcceleratorRegistry {
 public:
  static AcceleratorRegistry& instance();
  void add(const std::string& name, AcceleratorFactory factory);
  bool contains(const std::string& name) const;
  std::unique_ptr<AcceleratorModel> create(const AcceleratorConfig& config) const;
  std::vector<std::string> names() const;

 private:
  AcceleratorRegistry();
  std::map<std::string, AcceleratorFactory> factories_;
};

/// One accelerator slot: slave window, master ports, irq line and power
/// domain, plus the model plugged into it.
class XaifSocket : public Component, public BusSlave, public AcceleratorContext {
 public:
  XaifSocket(Engine& engine, Bus& bus, PowerManager& power, std::vector<MemoryBank>& banks,
             const PlatformConfig& config, std::uint32_t slot, std::unique_ptr<AcceleratorModel> model);
  XaifSocket(const XaifSocket&) = delete;
  XaifSocket& operator=(const XaifSocket&) = delete;

  std::string_view name() const override { return name_; }
  void handle(const Event& event) override;
  std::string describe(const Event& event) const override;

  AccessResult access(std::uint32_t offset, AccessKind kind, std::uint8_t width, std::uint32_t data) override;

  SimTime now() const override { return engine_.now(); }
  std::uint32_t slot() const override { return slot_; }
  MemoryBank* bank(std::uint32_t index) override;
  void wake() override;

  const Region& window() const { return bus_.map()[window_index_]; }
  const std::vector<MasterId>& master_ports() const { return masters_; }
  InterruptLine irq_line() const { return irq_; }
  DomainId power_domain() const { return DomainId::accelerator(slot_); }

  AcceleratorModel& model() { return *model_; }
  const AcceleratorModel& model() const { return *model_; }
  AccelState state() const { return model_->state(); }
  std::uint64_t irqs_raised() const { return irqs_; }

 private:
  bool powered() const;
  void advance();
  void schedule_next();
  void on_power(PowerState state);

  Engine& engine_;
  Bus& bus_;
  PowerManager& power_;
  std::vector<MemoryBank>& banks_;
  std::uint32_t slot_;
  std::string name_;
  std::unique_ptr<AcceleratorModel> model_;
  ComponentId id_;
  std::size_t window_index_;
  std::vector<MasterId> masters_;
  InterruptLine irq_;
  SimTime last_advance_ = 0;
  bool frozen_ = false;
  std::uint64_t generation_ = 0;
  std::uint64_t irqs_ = 0;
};

/// Slot table of the platform.
class Xaif {
 public:
  Xaif(Engine& engine, Bus& bus, PowerManager& power, std::vector<MemoryBank>& banks, const PlatformConfig& config);

  /// NoSuchSlot / SlotOccupied. The model is reset on attach.
  XaifSocket& attach(std::unique_ptr<AcceleratorModel> model, std::uint32_t slot);

  /// Register-level offload of `cmd` is left to the caller; this checks the
  /// preconditions. AcceleratorBusy / PoweredDown / NoSuchSlot.
  XaifSocket& ready_for_offload(std::uint32_t slot);

  /// Starts `cmd` through the socket window directly, with no bus traffic.
  void offload(std::uint32_t slot, const OffloadCommand& cmd);

  XaifSocket* socket(std::uint32_t slot);
  const XaifSocket* socket(std::uint32_t slot) const;
  std::uint32_t slot_count() const { return static_cast<std::uint32_t>(sockets_.size()); }

 private:
  Engine& engine_;
  Bus& bus_;
  PowerManager& power_;
  std::vector<MemoryBank>& banks_;
  const PlatformConfig& config_;
  std::vector<std::unique_ptr<XaifSocket>> sockets_;
};

}  // namespace xheep
