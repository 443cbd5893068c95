#include "tactile/pipeline.hpp"

#include "tactile/errors.hpp"

namespace tactile {

namespace {

PipelineConfig checked(PipelineConfig cfg) {
  cfg.validate();
  return cfg;
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

Pipeline::Pipeline(PipelineConfig cfg, PipelineObserver& observer, const Mlp* model,
                   MorseTable morse)
    : cfg_(checked(std::move(cfg))),
      observer_(observer),
      model_(model),
      morse_(std::move(morse)),
      segmenter_(cfg_.analyzer.gap_windows, cfg_.analyzer.letter_gap_windows) {
  if (model_ && (model_->input_size() != kChannels || model_->output_size() != kSymbolClasses)) {
    throw ConfigError("[config:model] symbol model must map 9 inputs to 4 classes");
  }
  sensors_.assign(kChannels, SensorChannel(cfg_.sensor));
  oscillators_.assign(kChannels, SpikeOscillator(cfg_.encoder));
  next_sample_tick_ = cfg_.sample_tick(0);
  backend_ = std::thread([this] { backend_loop(); });
}

Pipeline::~Pipeline() {
  queue_.close();
  if (backend_.joinable()) backend_.join();
}

void Pipeline::step(const Drive& drive) {
  if (finished_) throw ContractError("pipeline stepped after finish()");
  const double t = now_ms();
  const double dt = cfg_.tick_ms;
  std::array<double, kChannels> amps{};
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double volts = in_stage("sensor", [&] {
      const double v = sensors_[c].step(drive[c].kpa, dt);
      return drive[c].volts.value_or(v);
    });
    in_stage("encoder", [&] {
      if (auto p = oscillators_[c].tick(t, volts)) {
        ++pulses_;
        if (on_pulse) on_pulse(c, *p);
      }
    });
    in_stage("synapse", [&] {
      auto r = tactile::step(synapses_[c], oscillators_[c].gate(t), dt, cfg_.synapse);
      synapses_[c] = r.state;
      amps[c] = r.i_drain;
    });
  }
  if (on_currents) on_currents(t, amps);

  if (tick_ == next_sample_tick_) {
    const auto codes = in_stage("quantizer", [&] { return quantize(amps, cfg_.quantizer); });
    const auto unit = in_stage("codec", [&] { return to_wire(pack(codes)); });
    queue_.push(unit);
    ++units_encoded_;
    ++next_sample_;
    next_sample_tick_ = cfg_.sample_tick(next_sample_);
  }
  ++tick_;
}

void Pipeline::finish() {
  if (finished_) return;
  finished_ = true;
  queue_.close();
  if (backend_.joinable()) backend_.join();
  if (backend_error_) std::rethrow_exception(backend_error_);
}

PipelineCounters Pipeline::counters() const {
  return {tick_, pulses_, units_encoded_, units_decoded_.load(), windows_.load()};
}

void Pipeline::backend_loop() {
  try {
    WireStreamDecoder decoder;
    WindowAccumulator windows(cfg_.frames_per_window(), cfg_.codec.window_ms);
    std::size_t sample = 0;
    while (auto unit = queue_.pop()) {
      decoder.feed(*unit);
      while (auto payload = in_stage("decode", [&] { return decoder.next(); })) {
        CodeFrame frame{static_cast<double>(cfg_.sample_tick(sample)) * cfg_.tick_ms,
                        unpack(*payload)};
        ++sample;
        ++units_decoded_;
        observer_.on_frame(frame);
        if (auto report = in_stage("analyzer", [&] { return windows.push(frame); })) {
          ++windows_;
          handle_window(*report);
        }
      }
    }
    auto ev = segmenter_.finish();
    if (ev.segment_closed) observer_.on_segment(*ev.segment_closed);
    if (ev.letter_closed) emit_letter(std::move(*ev.letter_closed));
    flush_press();
  } catch (...) {
    backend_error_ = std::current_exception();
    // Keep draining so the producer never blocks on a full queue.
    while (queue_.pop()) {
    }
  }
}

void Pipeline::handle_window(const WindowReport& r) {
  observer_.on_window(r);
  auto ev = segmenter_.push(r.window_idx, cfg_.analyzer.pooled(r));
  if (ev.segment_closed) observer_.on_segment(*ev.segment_closed);
  if (ev.letter_closed) emit_letter(std::move(*ev.letter_closed));
  if (r.active) {
    press_reports_.push_back(r);
  } else {
    flush_press();
  }
}

void Pipeline::emit_letter(SegmentGroup segments) {
  LetterResult out;
  for (const auto& s : segments) out.classes.push_back(classify_segment(s.total_count));
  out.segments = std::move(segments);
  out.code = morse_string(out.classes);
  for (auto c : out.classes) out.continuous = out.continuous || c == SegmentClass::Continuous;
  if (!out.continuous) out.letter = decode_morse(out.classes, morse_);
  observer_.on_letter(out);
}

void Pipeline::flush_press() {
  if (press_reports_.empty()) return;
  SymbolResult s;
  s.first_window = press_reports_.front().window_idx;
  s.last_window = press_reports_.back().window_idx;
  s.feature = featurize(press_reports_);
  if (model_) {
    auto p = model_->forward(s.feature);
    std::copy(p.begin(), p.end(), s.probs.begin());
    s.symbol = static_cast<SymbolClass>(model_->predict(s.feature));
  }
  press_reports_.clear();
  observer_.on_symbol(s);
}

}  // namespace tactile
