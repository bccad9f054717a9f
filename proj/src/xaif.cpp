// Copyright 2026 The xheep-sim Authors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "xheep/xaif.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "xheep/error.hpp"

namespace xheep {

namespace {

constexpr double kQ16 = 65536.0;
__extension__ using u128 = unsigned __int128;

std::uint32_t to_q16(double v) { return static_cast<std::uint32_t>(std::llround(v * kQ16)); }

}  // namespace

std::string_view to_string(AccelState state) {
  switch (state) {
    case AccelState::Idle: return "idle";
    case AccelState::Busy: return "busy";
    case AccelState::Done: return "done";
  }
  return "?";
}

std::uint64_t Rational::ceil_mul(std::uint64_t count) const {
  const u128 p = static_cast<u128>(count) * num;
  return static_cast<std::uint64_t>((p + den - 1) / den);
}

Rational rational_from_double(double value, std::uint64_t den) {
  if (!(value > 0.0)) throw ConfigError("cycles_per_element", "must be positive");
  const auto num = static_cast<std::uint64_t>(std::max<long long>(1, std::llround(value * static_cast<double>(den))));
  return {num, den};
}

namespace nmv {

std::vector<std::pair<std::uint32_t, std::uint32_t>> command_writes(const OffloadCommand& cmd) {
  if (cmd.cycles_per_element.den != 65536)
    throw ConfigError("cycles_per_element", "register interface carries Q16.16 values only");
  return {{kKernel, cmd.kernel_id},
          {kCount, cmd.element_count},
          {kCpeQ16, static_cast<std::uint32_t>(cmd.cycles_per_element.num)},
          {kScale, cmd.scale},
          {kAdd, cmd.add},
          {kIntensityQ16, to_q16(cmd.intensity)},
          {kCtrl, 1}};
}

}  // namespace nmv

NearMemVector::NearMemVector(std::uint32_t bank_index, Rational default_cpe)
    : bank_index_(bank_index), default_cpe_(default_cpe) {
  reset();
}

void NearMemVector::reset() {
  if (state_ == AccelState::Busy && ctx_) {
    if (MemoryBank* b = ctx_->bank(bank_index_)) b->set_mode(BankMode::MemoryMode);
  }
  staged_ = OffloadCommand{};
  staged_.cycles_per_element = default_cpe_;
  running_ = staged_;
  state_ = AccelState::Idle;
  remaining_ = 0;
}

std::optional<std::uint32_t> NearMemVector::window_read(std::uint32_t offset) {
  switch (offset) {
    case nmv::kCtrl: return static_cast<std::uint32_t>(state_);
    case nmv::kKernel: return staged_.kernel_id;
    case nmv::kCount: return staged_.element_count;
    case nmv::kCpeQ16:
      return static_cast<std::uint32_t>(rational_from_double(staged_.cycles_per_element.value()).num);
    case nmv::kScale: return staged_.scale;
    case nmv::kAdd: return staged_.add;
    case nmv::kIntensityQ16: return to_q16(staged_.intensity);
    default: return std::nullopt;
  }
}

bool NearMemVector::window_write(std::uint32_t offset, std::uint32_t value) {
  switch (offset) {
    case nmv::kCtrl:
      if (value & 1u) return start();
      if (state_ == AccelState::Busy) return false;
      state_ = AccelState::Idle;
      return true;
    case nmv::kKernel:
      if (value != nmv::kKernelTimed && value != nmv::kKernelScaleAdd) return false;
      staged_.kernel_id = value;
      return true;
    case nmv::kCount: staged_.element_count = value; return true;
    case nmv::kCpeQ16:
      if (value == 0) return false;
      staged_.cycles_per_element = {value, 65536};
      return true;
    case nmv::kScale: staged_.scale = value; return true;
    case nmv::kAdd: staged_.add = value; return true;
    case nmv::kIntensityQ16: staged_.intensity = static_cast<double>(value) / kQ16; return true;
    default: return false;
  }
}

bool NearMemVector::start() {
  if (state_ == AccelState::Busy || !ctx_) return false;
  MemoryBank* b = ctx_->bank(bank_index_);
  if (!b) return false;
  running_ = staged_;
  remaining_ = running_.cycles_per_element.ceil_mul(running_.element_count);
  state_ = AccelState::Busy;
  b->set_mode(BankMode::ComputeMode);
  ++offloads_;
  return true;
}

void NearMemVector::step(SimTime cycles) {
  if (state_ != AccelState::Busy) return;
  remaining_ -= std::min(cycles, remaining_);
  if (remaining_ == 0) complete();
}

std::optional<SimTime> NearMemVector::cycles_to_event() const {
  if (state_ != AccelState::Busy) return std::nullopt;
  return remaining_;
}

void NearMemVector::complete() {
  MemoryBank* b = ctx_->bank(bank_index_);
  if (running_.kernel_id == nmv::kKernelScaleAdd && b->power_state() == PowerState::On) {
    const std::uint64_t words = std::min<std::uint64_t>(running_.element_count, b->size_bytes() / 4);
    for (std::uint32_t w = 0; w < words; ++w) {
      b->write_word(w * 4, b->read_word(w * 4) * running_.scale + running_.add);
    }
  }
  b->set_mode(BankMode::MemoryMode);
  state_ = AccelState::Done;
}

AcceleratorRegistry::AcceleratorRegistry() {
  add("near-mem-vector", [](const AcceleratorConfig& c) {
    return std::make_unique<NearMemVector>(c.bank_index, rational_from_double(c.cycles_per_element));
  });
}

AcceleratorRegistry& AcceleratorRegistry::instance() {
  static AcceleratorRegistry registry;
  return registry;
}

void AcceleratorRegistry::add(const std::string& name, AcceleratorFactory factory) {
  factories_[name] = std::move(factory);
}

bool AcceleratorRegistry::contains(const std::string& name) const { return factories_.contains(name); }

std::unique_ptr<AcceleratorModel> AcceleratorRegistry::create(const AcceleratorConfig& config) const {
  auto it = factories_.find(config.model);
  if (it == factories_.end()) throw ConfigError("accelerators.model", fmt::format("unknown model '{}'", config.model));
  return it->second(config);
}

std::vector<std::string> AcceleratorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

XaifSocket::XaifSocket(Engine& engine, Bus& bus, PowerManager& power, std::vector<MemoryBank>& banks,
                       const PlatformConfig& config, std::uint32_t slot, std::unique_ptr<AcceleratorModel> model)
    : engine_(engine),
      bus_(bus),
      power_(power),
      banks_(banks),
      slot_(slot),
      name_(fmt::format("accel{}", slot)),
      model_(std::move(model)) {
  auto window = bus_.map().index_of(RegionKind::AcceleratorWindow, slot);
  if (!window) throw NoSuchSlot(fmt::format("no accelerator window for slot {}", slot));
  window_index_ = *window;
  if (config.xaif_master_mode == XaifMasterMode::Dedicated) {
    masters_.push_back(MasterId::accelerator(static_cast<std::uint16_t>(slot)));
  } else {
    masters_.push_back(MasterId::dma(static_cast<std::uint16_t>(slot % config.dma_channel_count)));
  }
  irq_ = power_.line(IrqSource::Accelerator, slot);
  id_ = engine_.add_component(*this);
  bus_.attach_slave(window_index_, *this);
  power_.on_change(power_domain(), [this](PowerState s) { on_power(s); });
  frozen_ = power_.state(power_domain()) != PowerState::On;
  last_advance_ = engine_.now();
  model_->bind(*this);
  model_->reset();
}

MemoryBank* XaifSocket::bank(std::uint32_t index) { return index < banks_.size() ? &banks_[index] : nullptr; }

bool XaifSocket::powered() const { return power_.state(power_domain()) == PowerState::On; }

AccessResult XaifSocket::access(std::uint32_t offset, AccessKind kind, std::uint8_t width, std::uint32_t data) {
  if (!powered() || width != 4) return {BusStatus::SlaveError, 0};
  if (kind == AccessKind::Read) {
    auto v = model_->window_read(offset);
    return v ? AccessResult{BusStatus::Ok, *v} : AccessResult{BusStatus::SlaveError, 0};
  }
  advance();
  const bool ok = model_->window_write(offset, data);
  schedule_next();
  return {ok ? BusStatus::Ok : BusStatus::SlaveError, 0};
}

void XaifSocket::wake() {
  advance();
  schedule_next();
}

void XaifSocket::advance() {
  const SimTime now = engine_.now();
  const SimTime elapsed = now - last_advance_;
  last_advance_ = now;
  if (frozen_ || model_->state() != AccelState::Busy) return;
  auto& activity = engine_.activity();
  activity.accel_active_cycles += elapsed;
  activity.accel_weighted_cycles += static_cast<double>(elapsed) * model_->intensity();
  model_->step(elapsed);
  if (model_->state() == AccelState::Done) {
    ++irqs_;
    power_.raise(irq_);
  }
}

void XaifSocket::schedule_next() {
  ++generation_;
  if (frozen_) return;
  if (auto c = model_->cycles_to_event()) {
    engine_.schedule(Event{engine_.now() + *c, id_, EventKind::AccelDone, generation_});
  }
}

void XaifSocket::on_power(PowerState state) {
  if (state == PowerState::On) {
    if (!frozen_) return;
    frozen_ = false;
    last_advance_ = engine_.now();
    schedule_next();
    return;
  }
  advance();
  frozen_ = true;
  ++generation_;
  if (state == PowerState::Off) model_->reset();
}

void XaifSocket::handle(const Event& event) {
  if (event.kind != EventKind::AccelDone)
    throw SimulationAbort(fmt::format("{} got unexpected event {}", name_, payload_string(event)));
  if (event.tag != generation_) return;
  advance();
  schedule_next();
}

std::string XaifSocket::describe(const Event& event) const {
  if (event.kind == EventKind::AccelDone) {
    return fmt::format("AccelDone(slot={}{})", slot_, event.tag == generation_ ? "" : ";stale");
  }
  return payload_string(event);
}

Xaif::Xaif(Engine& engine, Bus& bus, PowerManager& power, std::vector<MemoryBank>& banks, const PlatformConfig& config)
    : engine_(engine), bus_(bus), power_(power), banks_(banks), config_(config), sockets_(config.accelerator_slots) {}

XaifSocket& Xaif::attach(std::unique_ptr<AcceleratorModel> model, std::uint32_t slot) {
  if (slot >= sockets_.size())
    throw NoSuchSlot(fmt::format("slot {} does not exist ({} slots configured)", slot, sockets_.size()));
  if (sockets_[slot]) throw SlotOccupied(fmt::format("slot {} already holds {}", slot, sockets_[slot]->model().model_name()));
  sockets_[slot] = std::make_unique<XaifSocket>(engine_, bus_, power_, banks_, config_, slot, std::move(model));
  return *sockets_[slot];
}

XaifSocket* Xaif::socket(std::uint32_t slot) { return slot < sockets_.size() ? sockets_[slot].get() : nullptr; }

const XaifSocket* Xaif::socket(std::uint32_t slot) const {
  return slot < sockets_.size() ? sockets_[slot].get() : nullptr;
}

XaifSocket& Xaif::ready_for_offload(std::uint32_t slot) {
  XaifSocket* s = socket(slot);
  if (!s) throw NoSuchSlot(fmt::format("no accelerator attached to slot {}", slot));
  if (power_.state(s->power_domain()) != PowerState::On)
    throw PoweredDown(fmt::format("{} is {}", s->name(), to_string(power_.state(s->power_domain()))));
  if (s->state() == AccelState::Busy) throw AcceleratorBusy(fmt::format("{} is busy", s->name()));
  return *s;
}

void Xaif::offload(std::uint32_t slot, const OffloadCommand& cmd) {
  XaifSocket& s = ready_for_offload(slot);
  for (const auto& [offset, value] : nmv::command_writes(cmd)) {
    if (s.access(offset, AccessKind::Write, 4, value).status != BusStatus::Ok)
      throw AcceleratorBusy(fmt::format("{} rejected register 0x{:02X}", s.name(), offset));
  }
}

}  // namespace xheep
