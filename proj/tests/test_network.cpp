#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "sumspike/network.hpp"
#include "sumspike/rng.hpp"

using namespace sumspike;

namespace {

QuantizedLayer make_layer(LayerKind kind, int in, int out, std::int32_t theta,
                          std::int8_t fill = 1) {
  QuantizedLayer l;
  l.kind = kind;
  l.in_width = in;
  l.out_width = out;
  l.quant.theta_q = theta;
  l.quant.m_w = 1u << 16;
  l.quant.m_b = 1u << 16;
  l.weights.assign(static_cast<std::size_t>(out),
                   std::vector<std::int8_t>(static_cast<std::size_t>(in), fill));
  l.biases.assign(static_cast<std::size_t>(out), 0);
  return l;
}

bool mentions(const std::vector<std::string>& violations, const std::string& text) {
  for (const auto& v : violations)
    if (v.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("validate accepts the 5-layer 32-64-32-16-64 model") {
  QuantizedNetwork net;
  net.window = 31;
  net.input_width = 128;
  int in = 128;
  for (int w : {32, 64, 32, 16, 64}) {
    net.layers.push_back(make_layer(LayerKind::Ssf, in, w, 5));
    in = w;
  }
  CHECK(validate(net).empty());
}

TEST_CASE("validate flags width, layer-count and capacity violations") {
  SUBCASE("width over the 128 limit") {
    QuantizedNetwork net;
    net.window = 4;
    net.input_width = 256;
    net.layers.push_back(make_layer(LayerKind::Ssf, 256, 16, 1));
    CHECK(mentions(validate(net), "in_width 256"));
  }

  SUBCASE("seven full-width layers break both the layer and capacity limits") {
    QuantizedNetwork net;
    net.window = 4;
    net.input_width = 128;
    for (int i = 0; i < 7; ++i)
      net.layers.push_back(make_layer(LayerKind::Ssf, 128, 128, 1));
    const auto v = validate(net);
    CHECK(mentions(v, "layer count 7 > 6"));
    CHECK(mentions(v, "weight memory"));
  }

  SUBCASE("broken width chaining is named") {
    QuantizedNetwork net;
    net.window = 4;
    net.input_width = 8;
    net.layers.push_back(make_layer(LayerKind::Ssf, 8, 16, 1));
    net.layers.push_back(make_layer(LayerKind::Ssf, 32, 8, 1));
    CHECK(mentions(validate(net), "does not chain"));
  }

  SUBCASE("empty network") {
    QuantizedNetwork net;
    CHECK(mentions(validate(net), "no layers"));
  }

  SUBCASE("SNN threshold must be positive") {
    QuantizedNetwork net;
    net.window = 4;
    net.input_width = 4;
    net.layers.push_back(make_layer(LayerKind::If, 4, 4, 0));
    CHECK(mentions(validate(net), "threshold"));
  }
}

TEST_CASE("param_count") {
  SUBCASE("single 2 -> 3 layer") {
    QuantizedNetwork net;
    net.window = 4;
    net.input_width = 2;
    net.layers.push_back(make_layer(LayerKind::Ssf, 2, 3, 1));
    CHECK(param_count(net) == 9);
  }

  SUBCASE("128-input 128-32-32 stack, against the hand sum") {
    // 128*128+128 + 128*32+32 + 32*32+32 = 16512 + 4128 + 1056
    QuantizedNetwork net;
    net.window = 31;
    net.input_width = 128;
    int in = 128;
    for (int w : {128, 32, 32}) {
      net.layers.push_back(make_layer(LayerKind::Ssf, in, w, 1));
      in = w;
    }
    CHECK(param_count(net) == 21696);
  }

  SUBCASE("empty network counts zero") {
    QuantizedNetwork net;
    CHECK(param_count(net) == 0);
  }
}

TEST_CASE("rate encoding") {
  SUBCASE("1/2 over T=4 is the alternating train") {
    CHECK(rate_encode_count(0.5, 4) == 2);
    const SpikeTrain t = rate_encode_train(2, 4);
    CHECK(t.bits == std::vector<std::uint8_t>{0, 1, 0, 1});
  }

  SUBCASE("zero maps to silence") {
    CHECK(rate_encode_count(0.0, 8) == 0);
    CHECK(count_spikes(rate_encode_train(0, 8)) == 0);
  }

  SUBCASE("one maps to a full train") {
    CHECK(rate_encode_count(1.0, 7) == 7);
    const SpikeTrain t = rate_encode_train(7, 7);
    CHECK(count_spikes(t) == 7);
  }

  SUBCASE("train always carries exactly `count` spikes") {
    for (int window = 1; window <= 16; ++window)
      for (int count = 0; count <= window; ++count)
        CHECK(count_spikes(rate_encode_train(count, window)) == count);
  }

  SUBCASE("out-of-range values are rejected") {
    CHECK_THROWS_AS(rate_encode_count(-0.1, 4), std::invalid_argument);
    CHECK_THROWS_AS(rate_encode_count(1.1, 4), std::invalid_argument);
  }

  SUBCASE("activation encoding") {
    CHECK(rate_encode_activation(0.0, 8) == 0);
    CHECK(rate_encode_activation(1.0, 8) == 255);
    CHECK(rate_encode_activation(0.5, 8) == 128);  // round(127.5) away from zero
  }
}

TEST_CASE("activation_to_count") {
  CHECK(activation_to_count(0, 31, 8) == 0);
  CHECK(activation_to_count(255, 31, 8) == 31);
  CHECK(activation_to_count(128, 4, 8) == 2);  // round(2.008)
}

TEST_CASE("count bit widths") {
  CHECK(count_bits(1) == 1);
  CHECK(count_bits(3) == 2);
  CHECK(count_bits(7) == 3);
  CHECK(count_bits(15) == 4);
  CHECK(count_bits(31) == 5);
  CHECK(count_fifo_width(3) == 2);
  CHECK(count_fifo_width(7) == 4);
  CHECK(count_fifo_width(15) == 4);
  CHECK(count_fifo_width(31) == 8);
  CHECK(activation_bits(LayerKind::If, 31) == 31);
  CHECK(activation_bits(LayerKind::Ann, 31) == 8);
}

TEST_CASE("forward: all-zero input with zero biases ties at class 0") {
  QuantizedNetwork net;
  net.window = 4;
  net.input_width = 3;
  net.layers.push_back(make_layer(LayerKind::Ssf, 3, 4, 1));
  EncodedInput input;
  input.kind = EncodedInput::Kind::Counts;
  input.values = {0, 0, 0};
  const auto r = forward(net, input);
  CHECK(r.predicted_class == 0);
  CHECK(r.scores == std::vector<std::int64_t>{0, 0, 0, 0});
}

TEST_CASE("forward: hand-computed two-layer SSF stack") {
  QuantizedNetwork net;
  net.window = 4;
  net.input_width = 2;

  QuantizedLayer l1 = make_layer(LayerKind::Ssf, 2, 2, 2);
  l1.weights = {{1, 1}, {2, 0}};
  l1.biases = {0, 1};
  net.layers.push_back(l1);

  QuantizedLayer l2 = make_layer(LayerKind::Ssf, 2, 3, 3);
  l2.weights = {{1, 1}, {3, 0}, {0, 2}};
  l2.biases = {0, 0, -1};
  net.layers.push_back(l2);

  EncodedInput input;
  input.kind = EncodedInput::Kind::Counts;
  input.values = {2, 3};

  // Layer 1: u = [5, 8] (bias scaled by T=4), counts = [2, 4].
  // Layer 2: u = [6, 6, 8-4], counts = [2, 2, 1].
  const auto r = forward(net, input);
  CHECK(r.scores == std::vector<std::int64_t>{2, 2, 1});
  CHECK(r.predicted_class == 0);  // tie broken toward the lower index
}

TEST_CASE("forward: bias_mode once adds the bias a single time") {
  QuantizedNetwork net;
  net.window = 4;
  net.input_width = 1;
  QuantizedLayer l = make_layer(LayerKind::Ssf, 1, 1, 1);
  l.bias_mode = BiasMode::Once;
  l.biases = {3};
  l.weights = {{0}};
  net.layers.push_back(l);
  EncodedInput input;
  input.kind = EncodedInput::Kind::Counts;
  input.values = {0};
  CHECK(forward(net, input).scores[0] == 3);

  net.layers[0].bias_mode = BiasMode::Scaled;
  CHECK(forward(net, input).scores[0] == 4);  // 3*4 = 12, clipped to T
}

TEST_CASE("forward: SSF dominates IF per neuron under nonnegative weights") {
  Rng rng(21);
  for (int iter = 0; iter < 200; ++iter) {
    const int window = rng.uniform_int(2, 12);
    QuantizedNetwork ssf;
    ssf.window = window;
    ssf.input_width = 3;
    QuantizedLayer a = make_layer(LayerKind::Ssf, 3, 3, rng.uniform_int(1, 6));
    QuantizedLayer b = make_layer(LayerKind::Ssf, 3, 2, rng.uniform_int(1, 6));
    for (auto* layer : {&a, &b}) {
      for (auto& row : layer->weights)
        for (auto& w : row) w = static_cast<std::int8_t>(rng.uniform_int(0, 3));
      for (auto& bias : layer->biases) bias = rng.uniform_int(0, 2);
    }
    ssf.layers = {a, b};

    QuantizedNetwork ifnet = ssf;
    for (auto& layer : ifnet.layers) layer.kind = LayerKind::If;

    EncodedInput input;
    input.kind = EncodedInput::Kind::Counts;
    for (int j = 0; j < 3; ++j) input.values.push_back(rng.uniform_int(0, window));

    const auto ssf_scores = forward(ssf, input).scores;
    const auto if_scores = forward(ifnet, input).scores;
    REQUIRE(ssf_scores.size() == if_scores.size());
    for (std::size_t i = 0; i < ssf_scores.size(); ++i)
      CHECK(if_scores[i] <= ssf_scores[i]);
  }
}

TEST_CASE("forward: SSF layers are invariant to input re-timing") {
  Rng rng(31);
  QuantizedNetwork net;
  net.window = 8;
  net.input_width = 4;
  QuantizedLayer l = make_layer(LayerKind::Ssf, 4, 3, 3);
  for (auto& row : l.weights)
    for (auto& w : row) w = static_cast<std::int8_t>(rng.uniform_int(-3, 3));
  net.layers.push_back(l);

  for (int iter = 0; iter < 200; ++iter) {
    EncodedInput trains;
    trains.kind = EncodedInput::Kind::Trains;
    for (int j = 0; j < 4; ++j) {
      SpikeTrain t = SpikeTrain::zeros(8);
      for (auto& bit : t.bits) bit = rng.bernoulli(0.4) ? 1 : 0;
      trains.trains.push_back(std::move(t));
    }
    const auto before = forward(net, trains);
    for (auto& t : trains.trains) rng.shuffle(t.bits);
    const auto after = forward(net, trains);
    CHECK(before.scores == after.scores);
  }
}

TEST_CASE("forward: representation adapters bridge every boundary") {
  // ANN -> SSF -> IF -> ANN exercises every conversion.
  QuantizedNetwork net;
  net.window = 8;
  net.input_width = 4;
  QuantizedLayer ann = make_layer(LayerKind::Ann, 4, 4, 0, 2);
  QuantizedLayer ssf = make_layer(LayerKind::Ssf, 4, 4, 2, 1);
  QuantizedLayer ifl = make_layer(LayerKind::If, 4, 4, 3, 1);
  QuantizedLayer ann2 = make_layer(LayerKind::Ann, 4, 2, 0, 1);
  net.layers = {ann, ssf, ifl, ann2};
  EncodedInput input;
  input.kind = EncodedInput::Kind::Activations;
  input.values = {10, 200, 0, 255};
  const auto r = forward(net, input);
  CHECK(r.scores.size() == 2);
  // Deterministic: same input, same result.
  CHECK(forward(net, input).scores == r.scores);
}

TEST_CASE("forward rejects mismatched input width") {
  QuantizedNetwork net;
  net.window = 4;
  net.input_width = 3;
  net.layers.push_back(make_layer(LayerKind::Ssf, 3, 2, 1));
  EncodedInput input;
  input.kind = EncodedInput::Kind::Counts;
  input.values = {1, 2};
  CHECK_THROWS_AS(forward(net, input), std::invalid_argument);
}

// ---------------------------------------------------------------------------

namespace {

FloatNetwork toy_float_net() {
  FloatNetwork net;
  net.window = 4;
  net.input_width = 2;
  FloatLayer ann;
  ann.kind = LayerKind::Ann;
  ann.in_width = 2;
  ann.out_width = 3;
  ann.weights = {{0.5, -0.25}, {1.0, 1.0}, {-0.75, 0.5}};
  ann.biases = {0.1, 0.0, -0.1};
  net.layers.push_back(ann);

  FloatLayer ssf;
  ssf.kind = LayerKind::Ssf;
  ssf.in_width = 3;
  ssf.out_width = 2;
  ssf.threshold = 1.0;
  ssf.weights = {{0.4, 0.2, -0.1}, {0.0, 0.3, 0.3}};
  ssf.biases = {0.05, -0.05};
  net.layers.push_back(ssf);
  return net;
}

}  // namespace

TEST_CASE("quantize_network produces the calibrated constants") {
  const FloatNetwork fnet = toy_float_net();
  std::vector<std::vector<double>> calib;
  Rng rng(5);
  for (int i = 0; i < 32; ++i)
    calib.push_back({rng.uniform(), rng.uniform()});

  const QuantizedNetwork qnet = quantize_network(fnet, calib, QuantConfig{8, 16, 16});
  REQUIRE(qnet.layers.size() == 2);

  const auto& ann = qnet.layers[0];
  // r_w spans weights+biases: max 1.0, min -0.75.
  CHECK(ann.quant.r_w == doctest::Approx(1.75 / 255.0));
  CHECK(ann.quant.r_i == doctest::Approx(1.0 / 255.0));
  CHECK(ann.quant.m_w ==
        static_cast<std::uint32_t>(round_half_away(
            ann.quant.r_i * ann.quant.r_w / ann.quant.r_o * 65536.0)));
  CHECK(ann.quant.m_b ==
        static_cast<std::uint32_t>(round_half_away(
            ann.quant.r_w / ann.quant.r_o * 65536.0)));

  const auto& ssf = qnet.layers[1];
  CHECK(ssf.quant.theta_q ==
        static_cast<std::int32_t>(round_half_away(1.0 / ssf.quant.r_w)));
  CHECK(ssf.quant.theta_q >= 1);

  // Weight rows quantized against r_w, clamped into int8.
  CHECK(static_cast<std::int64_t>(ann.weights[1][0]) ==
        std::clamp<std::int64_t>(round_half_away(1.0 / ann.quant.r_w), -128, 127));
}

TEST_CASE("quantize_network errors carry layer context") {
  FloatNetwork fnet = toy_float_net();
  fnet.layers[1].threshold = 1e-6;  // rounds to 0 at the layer's weight scale
  std::vector<std::vector<double>> calib{{0.2, 0.8}, {0.9, 0.1}};
  try {
    quantize_network(fnet, calib, QuantConfig{8, 16, 16});
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("quantize_network requires calibration data for ANN layers") {
  const FloatNetwork fnet = toy_float_net();
  CHECK_THROWS_AS(quantize_network(fnet, {}, QuantConfig{8, 16, 16}),
                  std::invalid_argument);
}

TEST_CASE("quantized forward stays close to the float intent on a toy model") {
  // A single ANN layer with a symmetric weight range (the scale formula
  // saturates one-sided tensors); the quantized activations should land
  // within a few percent of y / r_o.
  FloatNetwork fnet;
  fnet.window = 4;
  fnet.input_width = 2;
  FloatLayer ann;
  ann.kind = LayerKind::Ann;
  ann.in_width = 2;
  ann.out_width = 2;
  ann.weights = {{0.875, -0.875}, {-0.875, 0.875}};
  ann.biases = {0.0, 0.0};
  fnet.layers.push_back(ann);

  std::vector<std::vector<double>> calib;
  Rng rng(9);
  for (int i = 0; i < 64; ++i) calib.push_back({rng.uniform(), rng.uniform()});
  const QuantizedNetwork qnet = quantize_network(fnet, calib, QuantConfig{8, 16, 16});

  EncodedInput input = encode_sample({0.75, 0.25}, 4,
                                     EncodedInput::Kind::Activations, 8);
  const auto r = forward(qnet, input);
  const double r_o = qnet.layers[0].quant.r_o;
  // y0 = relu(0.875 * (0.75 - 0.25)) = 0.4375, y1 = relu(-0.4375) = 0.
  CHECK(static_cast<double>(r.scores[0]) * r_o ==
        doctest::Approx(0.4375).epsilon(0.05));
  CHECK(r.scores[1] == 0);
  CHECK(r.predicted_class == 0);
}
