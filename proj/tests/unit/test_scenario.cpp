#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tactile/calibrate.hpp"
#include "tactile/dataset.hpp"
#include "tactile/errors.hpp"
#include "tactile/scenario.hpp"

using namespace tactile;
using nlohmann::json;

namespace {

// Pearson correlation of rank vectors; ties share the mean of their positions.
double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double below = 0, equal = 0;
      for (double w : v) {
        below += w < v[i];
        equal += w == v[i];
      }
      r[i] = below + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

RunReport windows_only(std::size_t n, std::size_t active) {
  RunReport run;
  for (std::size_t w = 0; w < n; ++w) {
    WindowReport r;
    r.window_idx = w;
    r.active = w < active;
    run.windows.push_back(r);
  }
  return run;
}

}  // namespace

TEST_CASE("spearman") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 1, 4, 3, 5};
  CHECK(spearman(a, b) == doctest::Approx(0.8));
  const std::vector<double> c{1, 2, 3, 4}, d{1, 1, 2, 3};
  CHECK(spearman(c, d) == doctest::Approx(0.9486833).epsilon(1e-7));
  const std::vector<double> flat{2, 2, 2, 2};
  CHECK(spearman(c, flat) == 0.0);
  CHECK_THROWS_AS(spearman(a, c), ContractError);
  CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}), DomainError);

  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(40);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.index(6));
      y[i] = static_cast<double>(rng.index(6));
    }
    const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
                          std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (constant) continue;
    CHECK(spearman(x, y) == doctest::Approx(oracle_spearman(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("efficiency proxy") {
  const PipelineConfig cfg;
  SUBCASE("idle stream sends nothing") {
    const auto e = efficiency_report(windows_only(150, 0), cfg);
    CHECK(e.wire_bits == 0);
    CHECK(e.duration_s == doctest::Approx(60.0));
    CHECK(e.baseline_bits == doctest::Approx(6'480'000.0));
    CHECK(e.reduction_ratio == 1.0);
  }
  SUBCASE("every window active") {
    const auto e = efficiency_report(windows_only(150, 150), cfg);
    CHECK(e.units_transmitted == 4500);
    CHECK(e.wire_bits == 144000);
    CHECK(e.reduction_ratio == doctest::Approx(1.0 - 2400.0 / 108000.0));
  }
  SUBCASE("one window in ten") {
    const auto e = efficiency_report(windows_only(150, 15), cfg);
    CHECK(e.reduction_ratio == doctest::Approx(1.0 - 240.0 / 108000.0));
  }
  SUBCASE("empty run") {
    CHECK(efficiency_report(RunReport{}, cfg).reduction_ratio == 1.0);
  }
}

TEST_CASE("noiseless Morse script decodes") {
  ScenarioConfig sc;
  sc.stimulus = morse_stimulus(MorseScript{});
  const auto run = run_scenario(sc);
  CHECK(run.decoded_text() == "NIMTE");
  CHECK(run.efficiency.reduction_ratio > 0.9);
  const auto j = summary_json(run);
  CHECK(j["efficiency"]["metric"].get<std::string>().find("not electrical power") != std::string::npos);
}

TEST_CASE("Morse script timing") {
  MorseScript s;
  s.text = "N";
  const auto stim = morse_stimulus(s);
  REQUIRE(stim.presses.size() == 2);
  CHECK(stim.presses[0].t_on_ms == 400.0);
  CHECK(stim.presses[0].t_off_ms == 2200.0);
  CHECK(stim.presses[1].t_on_ms == 3330.0);
  CHECK(stim.presses[1].t_off_ms == 3830.0);
  CHECK(morse_script_from_json(json::parse(R"({"text": "SOS", "dot_ms": 400})")).dot_ms == 400.0);
  CHECK_THROWS_AS(morse_script_from_json(json::parse(R"({"txt": "SOS"})")), ConfigError);

  s.text = "#";
  CHECK_THROWS_AS(morse_stimulus(s), ConfigError);
}

TEST_CASE("ramp script") {
  const RampScript r;
  CHECK(r.pressure_at(0.0) == 0.0);
  CHECK(r.pressure_at(r.lead_ms) == doctest::Approx(r.min_kpa));
  CHECK(r.pressure_at(r.lead_ms + r.rise_ms / 2) == doctest::Approx(std::sqrt(r.min_kpa * r.max_kpa)));
  CHECK(r.pressure_at(r.lead_ms + r.rise_ms + 1.0) == r.max_kpa);
  CHECK(r.pressure_at(r.end_ms() - r.rise_ms / 2) == doctest::Approx(std::sqrt(r.min_kpa * r.max_kpa)));
  CHECK(r.pressure_at(r.end_ms()) == 0.0);

  const auto stim = ramp_stimulus(r);
  REQUIRE_FALSE(stim.trace.empty());
  for (const auto& f : stim.trace) {
    CHECK(f.kpa[4] == doctest::Approx(r.pressure_at(f.t_ms)));
    CHECK(f.kpa[0] == doctest::Approx(0.35 * r.pressure_at(f.t_ms)));
  }

  CHECK(ramp_script_from_json(json::parse(R"({"rise_ms": 3000})")).rise_ms == 3000.0);
  CHECK_THROWS_AS(ramp_script_from_json(json::parse(R"({"rise": 3000})")), ConfigError);
  CHECK_THROWS_AS(ramp_script_from_json(json::parse(R"({"min_kpa": 50, "max_kpa": 40})")), ConfigError);
}

TEST_CASE("calibration search") {
  const PipelineConfig base;
  CalibrationRanges ranges;
  ranges.eta = {0.7, 0.1};
  ranges.tau_ms = {250.0};
  ranges.theta1 = {2.0};
  ranges.theta2 = {3.0};
  ranges.theta3 = {3.5, 2.5};  // the second value is not increasing and is skipped

  const auto result = calibrate(base, ranges);
  REQUIRE(result.table.size() == 2);
  CHECK(result.table[0].pass);
  CHECK(result.table[0].eta == 0.7);
  CHECK(result.best.synapse.eta == 0.7);
  CHECK(result.table[0].margin >= 0.8);
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    const auto& a = result.table[i - 1];
    const auto& b = result.table[i];
    CHECK((a.pass > b.pass || (a.pass == b.pass && a.margin >= b.margin)));
  }

  ranges.eta = {};
  CHECK_THROWS_AS(calibrate(base, ranges), ConfigError);

  ranges.eta = {0.7};
  ranges.tolerance = 0.0;
  CHECK_THROWS_AS(calibrate(base, ranges), CalibrationError);
}

TEST_CASE("frequency probe") {
  const PipelineConfig cfg;
  const auto p = probe_frequency(cfg, 2.5);
  CHECK(p.expected == doctest::Approx(10.0));
  CHECK(p.segments == 1);
  CHECK(p.count == 10);
  CHECK_THROWS_AS(probe_frequency(cfg, 1.0), DomainError);
}

TEST_CASE("symbol dataset generation") {
  const PipelineConfig cfg;
  SymbolGenConfig gen;
  gen.n_per_class = 3;

  SUBCASE("noiseless presses light only the mold cells") {
    gen.noise = 0.0;
    const auto ds = gen_symbol_dataset(cfg, gen);
    REQUIRE(ds.samples.size() == 12);
    for (const auto& s : ds.samples) {
      const auto mask = symbol_mask(s.label);
      for (std::size_t c = 0; c < kChannels; ++c) {
        if (mask[c]) CHECK(s.feature[c] > 0.0);
        else CHECK(s.feature[c] == 0.0);
      }
    }
  }
  SUBCASE("balanced, interleaved and reproducible") {
    const auto a = gen_symbol_dataset(cfg, gen);
    const auto b = gen_symbol_dataset(cfg, gen);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].label == kAllSymbols[i % kSymbolClasses]);
      CHECK(a.samples[i].label == b.samples[i].label);
      CHECK(a.samples[i].feature == b.samples[i].feature);
    }
    gen.seed = 2;
    const auto c = gen_symbol_dataset(cfg, gen);
    bool differs = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) differs |= a.samples[i].feature != c.samples[i].feature;
    CHECK(differs);
  }
  SUBCASE("bad generator settings") {
    gen.n_per_class = 0;
    CHECK_THROWS_AS(gen_symbol_dataset(cfg, gen), ConfigError);
  }
}
