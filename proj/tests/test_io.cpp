#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "sumspike/errors.hpp"
#include "sumspike/io.hpp"
#include "sumspike/rng.hpp"

using namespace sumspike;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sumspike-io-" + std::to_string(Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("values CSV") {
  TempDir dir;

  SUBCASE("plain rows parse") {
    write(dir.file("v.csv"), "0.5, 0.25, 1\n0, 0.125, 0.75\n");
    const auto rows = load_values_csv(dir.file("v.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == doctest::Approx(0.5));
    CHECK(rows[1][2] == doctest::Approx(0.75));
  }

  SUBCASE("empty file errors with line context") {
    write(dir.file("e.csv"), "");
    try {
      load_values_csv(dir.file("e.csv"));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
  }

  SUBCASE("bad cell names its line") {
    write(dir.file("b.csv"), "0.5,0.5\n0.5,zebra\n");
    try {
      load_values_csv(dir.file("b.csv"));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SUBCASE("ragged rows are rejected") {
    write(dir.file("r.csv"), "1,2,3\n1,2\n");
    CHECK_THROWS_AS(load_values_csv(dir.file("r.csv")), FormatError);
  }
}

TEST_CASE("labeled CSV") {
  TempDir dir;
  write(dir.file("d.csv"), "0.1,0.2,0\n0.9,0.8,1\n0.2,0.1,0\n");
  const Dataset data = load_labeled_csv(dir.file("d.csv"));
  CHECK(data.feature_dim == 2);
  CHECK(data.size() == 3);
  CHECK(data.labels == std::vector<int>{0, 1, 0});
  CHECK(data.num_classes() == 2);

  write(dir.file("f.csv"), "0.1,0.2,0.5\n");
  CHECK_THROWS_AS(load_labeled_csv(dir.file("f.csv")), FormatError);
}

TEST_CASE("encoded files round-trip through text") {
  TempDir dir;
  EncodedFile file;
  file.window = 4;
  file.width = 3;
  file.q = 8;

  SUBCASE("counts") {
    file.kind = EncodedInput::Kind::Counts;
    file.samples.push_back(encode_sample({0.5, 0.0, 1.0}, 4,
                                         EncodedInput::Kind::Counts));
    write_encoded_file(dir.file("c.txt"), file);
    const EncodedFile back = read_encoded_file(dir.file("c.txt"));
    CHECK(back.kind == EncodedInput::Kind::Counts);
    CHECK(back.window == 4);
    REQUIRE(back.samples.size() == 1);
    CHECK(back.samples[0].values == std::vector<std::int32_t>{2, 0, 4});
    // Deterministic writer: re-serialization is byte-identical.
    CHECK(encoded_file_to_text(back) == slurp(dir.file("c.txt")));
  }

  SUBCASE("trains") {
    file.kind = EncodedInput::Kind::Trains;
    file.samples.push_back(encode_sample({0.5, 0.25, 1.0}, 4,
                                         EncodedInput::Kind::Trains));
    write_encoded_file(dir.file("t.txt"), file);
    const EncodedFile back = read_encoded_file(dir.file("t.txt"));
    REQUIRE(back.samples.size() == 1);
    CHECK(back.samples[0].trains[0].bits == std::vector<std::uint8_t>{0, 1, 0, 1});
    CHECK(count_spikes(back.samples[0].trains[2]) == 4);
  }

  SUBCASE("malformed header") {
    write(dir.file("m.txt"), "not an encoded file\n");
    CHECK_THROWS_AS(read_encoded_file(dir.file("m.txt")), FormatError);
  }

  SUBCASE("short body names the line") {
    write(dir.file("s.txt"),
          "sumspike-encoded v1\ntarget count\nT 4\nwidth 3\nq 8\nsamples 2\n1 2 3\n");
    try {
      read_encoded_file(dir.file("s.txt"));
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 8") != std::string::npos);
    }
  }
}

TEST_CASE("energy config JSON") {
  TempDir dir;

  SUBCASE("defaults round-trip") {
    EnergyConfig cfg;
    write(dir.file("c.json"), energy_config_to_json(cfg));
    const EnergyConfig back = load_energy_config(dir.file("c.json"));
    CHECK(back.coefficients.e_mac == doctest::Approx(0.13));
    CHECK(back.curve.anchors == cfg.curve.anchors);
  }

  SUBCASE("partial override keeps the rest at defaults") {
    write(dir.file("p.json"), "{\"e_mac\": 0.26}\n");
    const EnergyConfig back = load_energy_config(dir.file("p.json"));
    CHECK(back.coefficients.e_mac == doctest::Approx(0.26));
    CHECK(back.coefficients.e_acc == doctest::Approx(0.05));
  }

  SUBCASE("broken curve is a validation error") {
    write(dir.file("bad.json"),
          "{\"port_width_curve\": [[8, 1.0], [128, 2.0]]}\n");
    CHECK_THROWS_AS(load_energy_config(dir.file("bad.json")), ValidationError);
  }

  SUBCASE("non-JSON is a format error") {
    write(dir.file("x.json"), "{{{{");
    CHECK_THROWS_AS(load_energy_config(dir.file("x.json")), FormatError);
  }
}

TEST_CASE("float model JSON round-trips") {
  TempDir dir;
  FloatNetwork net;
  net.window = 8;
  net.input_width = 2;
  FloatLayer l;
  l.kind = LayerKind::Ssf;
  l.in_width = 2;
  l.out_width = 2;
  l.threshold = 0.75;
  l.bias_mode = BiasMode::Once;
  l.weights = {{0.5, -0.5}, {0.25, 0.125}};
  l.biases = {0.0, 0.1};
  net.layers.push_back(l);

  save_float_network_json(dir.file("m.json"), net);
  const FloatNetwork back = load_float_network_json(dir.file("m.json"));
  CHECK(back.window == 8);
  CHECK(back.input_width == 2);
  REQUIRE(back.layers.size() == 1);
  CHECK(back.layers[0].kind == LayerKind::Ssf);
  CHECK(back.layers[0].threshold == doctest::Approx(0.75));
  CHECK(back.layers[0].bias_mode == BiasMode::Once);
  CHECK(back.layers[0].weights == net.layers[0].weights);
  CHECK(back.layers[0].in_width == 2);
}

TEST_CASE("nas config JSON") {
  TempDir dir;
  write(dir.file("n.json"),
        "{\"n_init\": 8, \"rounds\": 2, \"k_best\": 2, \"offspring\": 3,"
        " \"seed\": 42, \"max_params\": 5000, \"depths\": [3],"
        " \"widths\": [16, 32]}\n");
  const NasFileConfig cfg = load_nas_config(dir.file("n.json"));
  CHECK(cfg.config.n_init == 8);
  CHECK(cfg.config.rounds == 2);
  CHECK(cfg.config.seed == 42);
  CHECK(cfg.config.max_params == 5000);
  CHECK(cfg.space.depths == std::vector<int>{3});
  CHECK(cfg.space.widths == std::vector<int>{16, 32});
  CHECK(cfg.config.expected_evaluations() == 8 + 2 * 2 * 3);
}

TEST_CASE("architecture strings") {
  CHECK(arch_to_string({32, 64, 16}) == "32x64x16");
  CHECK(arch_from_string("32x64x16") == Architecture{32, 64, 16});
  CHECK_THROWS_AS(arch_from_string(""), FormatError);
}

TEST_CASE("history lines carry one candidate per line") {
  Candidate c;
  c.id = 3;
  c.round = 1;
  c.parent_id = 0;
  c.arch = {16, 32, 16};
  c.accuracy = 0.912345;
  c.energy_pj = 1234.5;
  c.score = 0.9;
  c.feasible = true;
  const std::string lines = history_lines({c, c});
  CHECK(lines ==
        "id=3 round=1 parent=0 arch=16x32x16 acc=0.912345 energy_pj=1234.500 "
        "score=0.900000 feasible=1\n"
        "id=3 round=1 parent=0 arch=16x32x16 acc=0.912345 energy_pj=1234.500 "
        "score=0.900000 feasible=1\n");
}

TEST_CASE("fixed formatting is stable") {
  CHECK(format_fixed(0.124, 6) == "0.124000");
  CHECK(format_fixed(-1.5, 2) == "-1.50");
  CHECK(format_fixed(2.6, 6) == "2.600000");
}
