#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tactile/blocking_queue.hpp"
#include "tactile/config.hpp"
#include "tactile/mlp.hpp"
#include "tactile/morse.hpp"
#include "tactile/symbols.hpp"

namespace tactile {

struct LetterResult {
  SegmentGroup segments;
  std::vector<SegmentClass> classes;
  std::string code;            // dots and dashes, '~' for continuous
  std::optional<char> letter;  // nullopt: rejected or continuous
  bool continuous = false;     // routed to trend reporting instead of Morse
};

struct SymbolResult {
  std::size_t first_window = 0;
  std::size_t last_window = 0;
  Feature feature{};
  std::optional<SymbolClass> symbol;  // set when a model is loaded
  std::array<double, kSymbolClasses> probs{};
};

// Receives back-end results in stream order, on the analyzer thread.
class PipelineObserver {
 public:
  virtual ~PipelineObserver() = default;
  virtual void on_frame(const CodeFrame&) {}
  virtual void on_window(const WindowReport&) {}
  virtual void on_segment(const Segment&) {}
  virtual void on_letter(const LetterResult&) {}
  virtual void on_symbol(const SymbolResult&) {}
};

struct PipelineCounters {
  std::uint64_t ticks = 0;
  std::uint64_t pulses = 0;
  std::uint64_t units_encoded = 0;
  std::uint64_t units_decoded = 0;
  std::uint64_t windows = 0;
};

// One 3x3 front end stepped in lockstep ticks. Each quantizer sample is packed,
// serialized and queued; a second thread decodes the wire units and runs the
// window analysis, segmentation and recognizers.
class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, PipelineObserver& observer, const Mlp* model = nullptr,
           MorseTable morse = {});
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  // Front-end taps, invoked on the caller's thread.
  std::function<void(std::size_t channel, const Pulse&)> on_pulse;
  std::function<void(double t_ms, const std::array<double, kChannels>& amps)> on_currents;

  void step(const Drive& drive);
  // Drains the queue, flushes open segments and presses, joins the analyzer
  // thread and rethrows any error it hit. Idempotent.
  void finish();

  double now_ms() const noexcept { return static_cast<double>(tick_) * cfg_.tick_ms; }
  std::uint64_t tick() const noexcept { return tick_; }
  const PipelineConfig& config() const noexcept { return cfg_; }
  // units_decoded and windows are final only after finish().
  PipelineCounters counters() const;

 private:
  void backend_loop();
  void handle_window(const WindowReport& r);
  void emit_letter(SegmentGroup segments);
  void flush_press();

  PipelineConfig cfg_;
  PipelineObserver& observer_;
  const Mlp* model_;
  MorseTable morse_;

  std::vector<SensorChannel> sensors_;
  std::vector<SpikeOscillator> oscillators_;
  std::array<SynapseState, kChannels> synapses_{};
  std::uint64_t tick_ = 0;
  std::size_t next_sample_ = 0;
  std::size_t next_sample_tick_ = 0;
  std::uint64_t pulses_ = 0;
  std::uint64_t units_encoded_ = 0;

  // Analyzer-side state, touched only by the analyzer thread.
  std::atomic<std::uint64_t> units_decoded_{0};
  std::atomic<std::uint64_t> windows_{0};
  Segmenter segmenter_;
  std::vector<WindowReport> press_reports_;

  BlockingQueue<WireUnit> queue_;
  std::exception_ptr backend_error_;
  std::thread backend_;
  bool finished_ = false;
};

}  // namespace tactile
