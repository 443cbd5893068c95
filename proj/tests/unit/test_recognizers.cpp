#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tactile/errors.hpp"
#include "tactile/morse.hpp"
#include "tactile/mlp.hpp"
#include "tactile/symbols.hpp"

using namespace tactile;

namespace {

using SC = SegmentClass;

double max_relative_gradient_error(const Mlp& model, const std::vector<LabeledVector>& batch, double h) {
  Mlp m = model;
  Gradients g = Gradients::zeros_like(m);
  loss_and_gradients(m, batch, g);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.parameter_count(); ++i) {
    const double saved = m.parameter(i);
    m.parameter(i) = saved + h;
    const double up = mean_loss(m, batch);
    m.parameter(i) = saved - h;
    const double down = mean_loss(m, batch);
    m.parameter(i) = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = g.flat(i);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

WindowReport report_with_max(const Codes& max) {
  WindowReport r;
  r.max = max;
  r.active = std::any_of(max.begin(), max.end(), [](Code c) { return c > 0; });
  return r;
}

}  // namespace

TEST_CASE("morse lookup") {
  const MorseTable table;
  CHECK(decode_morse(std::vector<SC>{SC::Dash, SC::Dot}, table) == 'N');
  CHECK(decode_morse(std::vector<SC>{SC::Dot, SC::Dot}, table) == 'I');
  CHECK(decode_morse(std::vector<SC>{SC::Dash, SC::Dash}, table) == 'M');
  CHECK(decode_morse(std::vector<SC>{SC::Dot}, table) == 'E');
  CHECK(decode_morse(std::vector<SC>{SC::Dash}, table) == 'T');
  CHECK_FALSE(decode_morse(std::vector<SC>{SC::Dot, SC::Dot, SC::Dot}, table).has_value());
  CHECK_THROWS_AS(decode_morse(std::vector<SC>{SC::Dash, SC::Continuous}, table), RoutingError);
  CHECK(morse_string(std::vector<SC>{SC::Dash, SC::Dot, SC::Continuous}) == "-.~");
  CHECK(table.code_for('M') == "--");
  CHECK_FALSE(table.code_for('Q').has_value());
}

TEST_CASE("morse table is extensible") {
  const MorseTable table({{"...", 'S'}, {"---", 'O'}});
  CHECK(decode_morse(std::vector<SC>{SC::Dot, SC::Dot, SC::Dot}, table) == 'S');
  CHECK_FALSE(decode_morse(std::vector<SC>{SC::Dot}, table).has_value());
}

TEST_CASE("classification then lookup is exact for noiseless counts") {
  const MorseTable table;
  for (const auto& [code, letter] : table.entries()) {
    std::vector<SC> classes;
    for (char ch : code) classes.push_back(classify_segment(ch == '.' ? 4 : 14));
    CHECK(decode_morse(classes, table) == letter);
  }
}

TEST_CASE("mlp forward") {
  Mlp zero({9, 32, 16, 8, 4});
  const std::vector<double> x(9, 0.7);
  for (double p : zero.forward(x)) CHECK(p == doctest::Approx(0.25));
  CHECK_THROWS_AS(zero.forward(std::vector<double>(8, 0.0)), ContractError);

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Mlp m = Mlp::he_init({9, 32, 16, 8, 4}, rng);
    std::vector<double> in(9);
    for (double& v : in) v = rng.uniform(-1.0, 1.0);
    const auto p = m.forward(in);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : p) CHECK(v >= 0.0);
    CHECK(m.predict(in) == static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
  }
  CHECK(zero.parameter_count() == 9 * 32 + 32 + 32 * 16 + 16 + 16 * 8 + 8 + 8 * 4 + 4);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(101);
  for (int net = 0; net < 10; ++net) {
    const std::vector<std::size_t> sizes{3 + static_cast<std::size_t>(net % 3), 5, 4, 3};
    Mlp m = Mlp::he_init(sizes, rng);
    for (std::size_t i = 0; i < m.parameter_count(); ++i) m.parameter(i) += rng.uniform(-0.1, 0.1);
    std::vector<LabeledVector> batch(6);
    for (auto& s : batch) {
      s.x.resize(sizes.front());
      for (double& v : s.x) v = rng.uniform(-1.0, 1.0);
      s.label = rng.index(sizes.back());
    }
    CHECK(max_relative_gradient_error(m, batch, 1e-5) <= 1e-5);
  }
}

TEST_CASE("training memorizes a single example") {
  std::vector<LabeledVector> one{{{1.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.5, 0.0, 1.0}, 2}};
  TrainConfig cfg;
  cfg.epochs = 200;
  const auto result = mlp_train(one, cfg);
  CHECK(mean_loss(result.model, one) < 1e-3);
  CHECK(result.curve.back().accuracy == 1.0);
  CHECK(result.curve.size() == 200);
}

TEST_CASE("training is deterministic and rejects empty data") {
  std::vector<LabeledVector> data;
  Rng rng(9);
  for (int i = 0; i < 40; ++i) {
    LabeledVector s;
    s.label = static_cast<std::size_t>(i % 4);
    s.x.assign(9, 0.0);
    for (double& v : s.x) v = rng.uniform();
    s.x[s.label] += 1.0;
    data.push_back(s);
  }
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto a = mlp_train(data, cfg);
  const auto b = mlp_train(data, cfg);
  std::ostringstream sa, sb;
  a.model.save(sa);
  b.model.save(sb);
  CHECK(sa.str() == sb.str());
  CHECK_THROWS_AS(mlp_train(std::vector<LabeledVector>{}, cfg), DomainError);
}

TEST_CASE("model save and load round trip") {
  Rng rng(5);
  const Mlp m = Mlp::he_init({9, 32, 16, 8, 4}, rng);
  std::stringstream ss;
  m.save(ss);
  CHECK(ss.str().rfind("tactile-mlp 1\n9 32 16 8 4\n", 0) == 0);
  const Mlp back = Mlp::load(ss);
  for (std::size_t i = 0; i < m.parameter_count(); ++i) {
    REQUIRE(m.parameter(i) == back.parameter(i));
  }
  std::stringstream bad("tactile-mlp 2\n9 4\n");
  CHECK_THROWS_AS(Mlp::load(bad), FormatError);
  std::stringstream truncated("tactile-mlp 1\n2 2\n1 2\n");
  CHECK_THROWS_AS(Mlp::load(truncated), FormatError);
}

TEST_CASE("evaluate reports accuracy, macro recall and the confusion matrix") {
  Mlp m({2, 2});
  m.layers()[0].w(0, 0) = 1.0;
  m.layers()[0].w(1, 1) = 1.0;
  const std::vector<LabeledVector> data{{{1.0, 0.0}, 0}, {{0.0, 1.0}, 1}, {{0.0, 1.0}, 0}, {{1.0, 0.0}, 0}};
  const auto metrics = evaluate(m, data);
  CHECK(metrics.accuracy == doctest::Approx(0.75));
  CHECK(metrics.macro_recall == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0));
  CHECK(metrics.confusion[0][1] == 1);
}

TEST_CASE("symbol masks") {
  auto cells = [](SymbolClass s) {
    std::vector<std::size_t> out;
    const auto m = symbol_mask(s);
    for (std::size_t c = 0; c < kChannels; ++c) {
      if (m[c]) out.push_back(c);
    }
    return out;
  };
  CHECK(cells(SymbolClass::Plus) == std::vector<std::size_t>{1, 3, 4, 5, 7});
  CHECK(cells(SymbolClass::Minus) == std::vector<std::size_t>{3, 4, 5});
  CHECK(cells(SymbolClass::Times) == std::vector<std::size_t>{0, 2, 4, 6, 8});
  CHECK(cells(SymbolClass::Divide) == std::vector<std::size_t>{2, 4, 6});
  for (auto a : kAllSymbols) {
    for (auto b : kAllSymbols) {
      if (a != b) CHECK(symbol_mask(a) != symbol_mask(b));
    }
    CHECK(symbol_from_string(to_string(a)) == a);
  }
  CHECK_THROWS_AS(symbol_from_string("equals"), FormatError);
}

TEST_CASE("featurize") {
  Codes all;
  all.fill(3);
  const std::vector<WindowReport> saturated{report_with_max(all)};
  for (double f : featurize(saturated)) CHECK(f == 1.0);

  Codes centre{};
  centre[4] = 1;
  Codes centre2{};
  centre2[4] = 2;
  const std::vector<WindowReport> press{report_with_max(centre), report_with_max(centre2), report_with_max(Codes{})};
  const auto f = featurize(press);
  for (std::size_t c = 0; c < kChannels; ++c) CHECK(f[c] == doctest::Approx(c == 4 ? 2.0 / 3.0 : 0.0));

  const std::vector<WindowReport> idle{report_with_max(Codes{})};
  CHECK_THROWS_AS(featurize(idle), DomainError);
}

TEST_CASE("dataset CSV round trip and split") {
  std::vector<SymbolSample> samples;
  for (int i = 0; i < 10; ++i) {
    SymbolSample s;
    s.label = kAllSymbols[static_cast<std::size_t>(i) % 4];
    s.feature.fill(i / 10.0);
    samples.push_back(s);
  }
  std::stringstream ss;
  write_dataset_csv(ss, samples);
  const auto back = read_dataset_csv(ss);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].label == samples[i].label);
    CHECK(back[i].feature == samples[i].feature);
  }

  std::vector<SymbolSample> train, test, train2, test2;
  split_dataset(samples, 0.8, 4, train, test);
  split_dataset(samples, 0.8, 4, train2, test2);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train[i].feature == train2[i].feature);

  std::stringstream bad("label,f0,f1,f2,f3,f4,f5,f6,f7,f8\nplus,0,0,0,0,0,0,0,0,1.5\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), FormatError);
}
