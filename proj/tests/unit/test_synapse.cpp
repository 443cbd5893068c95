#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tactile/errors.hpp"
#include "tactile/synapse.hpp"

using namespace tactile;

namespace {

PulseTrain regular_train(std::size_t n, double interval_ms, double amplitude = -2.0, double width_ms = 10.0) {
  PulseTrain t;
  for (std::size_t i = 0; i < n; ++i) t.pulses.push_back({100.0 + interval_ms * static_cast<double>(i), amplitude, width_ms});
  return t;
}

double end_of(const PulseTrain& t) { return t.pulses.back().t_ms + t.pulses.back().width_ms + 2000.0; }

}  // namespace

TEST_CASE("resting state") {
  SynapseParams p;
  auto r = step({}, 0.0, 5.0, p);
  CHECK(r.state.w == 0.0);
  CHECK(r.i_drain == doctest::Approx(p.i_off));
}

TEST_CASE("pure decay over one time constant") {
  SynapseParams p;
  const double w0 = 0.6;
  auto r = step({w0, 0.0}, 0.0, p.tau_ms, p);
  CHECK(r.state.w == doctest::Approx(w0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("one pulse matches the continuous-time closed form") {
  // dw/dt = -w/tau + (eta |g| / (a_ref d_ref)) (1 - w), integrated over the pulse
  // from w = 0: w(T) = k_in / k (1 - exp(-k T)) with k = 1/tau + k_in.
  SynapseParams p;
  const double k_in = p.eta * (2.0 / p.a_ref) / p.d_ref_ms;
  const double k = 1.0 / p.tau_ms + k_in;
  const double expected = k_in / k * (1.0 - std::exp(-k * 10.0));

  PulseTrain t;
  t.pulses.push_back({0.0, -2.0, 10.0});
  const auto trace = simulate(t, p, 0.001, 10.0);
  const double w = (trace.amps.back() / p.i_off - 1.0) / (p.on_off_ratio - 1.0);
  CHECK(w == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("empty train gives a flat off current") {
  SynapseParams p;
  const auto trace = simulate({}, p, 1.0, 500.0);
  CHECK(trace.amps.size() == 500);
  for (double a : trace.amps) CHECK(a == doctest::Approx(p.i_off));
}

TEST_CASE("current stays within the on/off bounds and w within [0, w_max]") {
  SynapseParams p;
  p.eta = 5.0;
  SynapseState s;
  for (int k = 0; k < 5000; ++k) {
    const double gate = (k % 50) < 20 ? -3.0 : 0.0;
    auto r = step(s, gate, 1.0, p);
    CHECK(r.state.w >= 0.0);
    CHECK(r.state.w <= p.w_max);
    CHECK(r.i_drain >= p.i_off * (1.0 - 1e-12));
    CHECK(r.i_drain <= p.i_on() * (1.0 + 1e-12));
    s = r.state;
  }
}

TEST_CASE("decay without input never exceeds the exponential envelope") {
  SynapseParams p;
  SynapseState s{0.8, 0.0};
  for (int k = 1; k <= 2000; ++k) {
    s = step(s, 0.0, 1.0, p).state;
    CHECK(s.w <= 0.8 * std::exp(-k / p.tau_ms) * (1.0 + 1e-12));
  }
}

TEST_CASE("more pulses and shorter intervals raise the peak") {
  SynapseParams p;
  const auto few = regular_train(10, 100.0);
  const auto many = regular_train(25, 100.0);
  CHECK(peak_metrics(simulate(many, p, 1.0, end_of(many)).amps).global_max >
        peak_metrics(simulate(few, p, 1.0, end_of(few)).amps).global_max);

  const auto fast = regular_train(10, 300.0);
  const auto slow = regular_train(10, 700.0);
  CHECK(peak_metrics(simulate(fast, p, 1.0, end_of(fast)).amps).global_max >
        peak_metrics(simulate(slow, p, 1.0, end_of(slow)).amps).global_max);
}

TEST_CASE("simulate rejects a tick coarser than half the narrowest pulse") {
  SynapseParams p;
  CHECK_THROWS_AS(simulate(regular_train(3, 100.0), p, 6.0, 1000.0), ConfigError);
}

TEST_CASE("peak metrics") {
  CHECK_THROWS_AS(peak_metrics({}), DomainError);

  const auto flat = peak_metrics(std::vector<double>(20, 3.5));
  CHECK(flat.global_max == 3.5);
  CHECK(flat.local_maxima.empty());

  SynapseParams p;
  const auto single = simulate(regular_train(1, 100.0), p, 1.0, 1000.0);
  CHECK(peak_metrics(single.amps).local_maxima.size() == 1);

  const auto separated = regular_train(6, 1500.0);
  CHECK(peak_metrics(simulate(separated, p, 1.0, end_of(separated)).amps).local_maxima.size() == 6);

  const auto m = peak_metrics({0.0, 1.0, 1.0, 0.5, 2.0, 2.0});
  REQUIRE(m.local_maxima.size() == 1);
  CHECK(m.local_maxima[0].index == 1);
  CHECK(m.global_max == 2.0);
}

TEST_CASE("current CSV export") {
  std::vector<CurrentTrace> traces{{1.0, {1e-9, 2e-9}}};
  std::ostringstream out;
  write_current_csv(out, traces);
  CHECK(out.str() == "t_ms,channel,amps\n0,0,1e-09\n1,0,2e-09\n");
}
