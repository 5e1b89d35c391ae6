#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "commute/errors.hpp"
#include "commute/io.hpp"
#include "support.hpp"

using namespace commute;
using commute::testing::temp_path;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

bool exists(const std::string& p) { return std::filesystem::exists(p); }

GridField random_field(int n, int res, std::uint64_t seed) {
  const TorusDomain d = TorusDomain::uniform(n, res, 1.5);
  std::vector<double> v(d.node_count());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (double& x : v)
    x = g(rng);
  return GridField(d, v);
}

} // namespace

TEST_CASE("FGRID round trip is bit exact") {
  const GridField f = random_field(2, 64, 1);
  const std::string bytes = encode_fgrid(f);
  CHECK(bytes.substr(0, 4) == "FGRD");
  CHECK(bytes.size() == 4 + 4 + 4 + 2 * 4 + 2 * 8 + 64 * 64 * 8);
  const GridField g = decode_fgrid(bytes);
  CHECK(g.domain() == f.domain());
  CHECK(std::memcmp(g.values().data(), f.values().data(), f.size() * sizeof(double)) == 0);
  CHECK(encode_fgrid(g) == bytes);

  const GridField h = random_field(3, 16, 2);
  CHECK(encode_fgrid(decode_fgrid(encode_fgrid(h))) == encode_fgrid(h));

  const std::string path = temp_path("rt.fgrd");
  write_fgrid(path, f);
  CHECK(encode_fgrid(read_fgrid(path)) == bytes);
  std::filesystem::remove(path);
}

TEST_CASE("FGRID decoding errors") {
  const std::string good = encode_fgrid(random_field(2, 16, 3));
  std::string bad = good;
  bad.replace(0, 4, "XXXX");
  CHECK_THROWS_AS(decode_fgrid(bad), FormatError);
  bad = good;
  bad[4] = 2;
  CHECK_THROWS_AS(decode_fgrid(bad), FormatError);
  CHECK_THROWS_AS(decode_fgrid(good.substr(0, good.size() - 1)), FormatError);
  CHECK_THROWS_AS(decode_fgrid(good + "x"), FormatError);
  CHECK_THROWS_AS(decode_fgrid(""), FormatError);
  bad = good;
  bad[8] = 5; // dimension
  CHECK_THROWS_AS(decode_fgrid(bad), FormatError);
  bad = good;
  bad[12] = 17; // resolution not a power of two
  CHECK_THROWS_AS(decode_fgrid(bad), FormatError);
  CHECK_THROWS_AS(read_fgrid("/nonexistent/dir/f.fgrd"), IoError);
}

TEST_CASE("VOXSET round trip") {
  const VoxelSet k = commute::testing::random_voxels(3, 0.05, 9, 16);
  const std::string bytes = encode_voxset(k);
  CHECK(bytes.substr(0, 4) == "VOXS");
  const VoxelSet back = decode_voxset(bytes);
  CHECK(back == k);
  CHECK(encode_voxset(back) == bytes);

  const VoxelSet empty(2, 0.25, {0.5, -1.0}, {});
  const VoxelSet e = decode_voxset(encode_voxset(empty));
  CHECK(e.empty());
  CHECK(e.measure() == 0.0);
  CHECK(e == empty);

  std::string bad = bytes;
  bad.replace(0, 4, "XXXX");
  CHECK_THROWS_AS(decode_voxset(bad), FormatError);
  CHECK_THROWS_AS(decode_voxset(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(decode_voxset(bytes + std::string(1, '\0')), FormatError);
}

TEST_CASE("VOXSET rejects unsorted indices") {
  const VoxelSet k(2, 0.5, {0.0, 0.0}, {{0, 0, 0}, {1, 0, 0}});
  std::string bytes = encode_voxset(k);
  // Swap the two index records (each 2 x i32) at the end.
  const std::size_t tail = bytes.size() - 16;
  const std::string a = bytes.substr(tail, 8);
  const std::string b = bytes.substr(tail + 8, 8);
  bytes.replace(tail, 16, b + a);
  CHECK_THROWS_AS(decode_voxset(bytes), FormatError);
}

TEST_CASE("voxel set basics") {
  const VoxelSet k(2, 0.5, {0.0, 0.0}, {{1, 1, 0}, {0, 0, 0}, {1, 1, 0}});
  CHECK(k.count() == 2);
  CHECK(k.measure() == 0.5);
  CHECK(k.indices().front() == VoxelSet::Index{0, 0, 0});
  CHECK(k.dilated(1).count() == 14);  // two 3x3 blocks sharing 4 cells
  CHECK(k.scaled(2.0).measure() == 2.0);
  const std::vector<double> x{2.0, 0.5};
  CHECK(k.distance_to_voxel(1, x) == doctest::Approx(1.0));
  CHECK_THROWS_AS(VoxelSet(4, 0.5, {0, 0, 0, 0}, {}), UsageError);
  CHECK_THROWS_AS(VoxelSet(2, -0.5, {0, 0}, {}), UsageError);
  CHECK_THROWS_AS(VoxelSet(2, 0.5, {0}, {}), UsageError);
  CHECK_THROWS_AS(k.merged(VoxelSet(2, 0.25, {0, 0}, {})), UsageError);
}

TEST_CASE("cli bracket reports the analytic norm") {
  const std::string out = temp_path("bracket.fgrd");
  const Result r = run_cli({"bracket", "--in", "expr:sin(2πx)", "expr:sin(2πy)", "--resolution", "512", "--out", out});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["command"] == "bracket");
  CHECK(std::abs(j["bracket"]["l1_norm"].get<double>() - 16.0) <= 0.16);
  CHECK(read_fgrid(out).domain().resolution[0] == 512);
  std::filesystem::remove(out);
}

TEST_CASE("cli collapse of an empty voxel set is the identity") {
  const std::string in = temp_path("empty.voxs");
  write_voxset(in, VoxelSet(2, 0.1, {0.0, 0.0}, {}));
  const Result r = run_cli({"collapse", "--voxels", in});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["collapse_map"]["mode"] == "identity");
  CHECK(j["displacement"]["skeleton_max_distance"] == "not applicable");
  std::filesystem::remove(in);
}

TEST_CASE("cli approximate with mismatched domains writes nothing") {
  const std::string a = temp_path("a32.fgrd");
  const std::string b = temp_path("b64.fgrd");
  write_fgrid(a, sample_field(TorusDomain::uniform(2, 32), "sin(2πx)"));
  write_fgrid(b, sample_field(TorusDomain::uniform(2, 64), "sin(2πy)"));
  const std::string prefix = temp_path("mm_out");
  const std::string report = temp_path("mm.json");
  const Result r = run_cli({"approximate", "--in", a, b, "--out-prefix", prefix, "--report", report});
  CHECK(r.code == 2);
  CHECK_FALSE(exists(report));
  CHECK_FALSE(exists(prefix + "1.fgrd"));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("cli exit codes") {
  SUBCASE("bad magic is a format error") {
    const std::string p = temp_path("bad.fgrd");
    write_file(p, "XXXX" + std::string(40, '\0'));
    CHECK(run_cli({"bracket", "--in", p, p}).code == 3);
    std::filesystem::remove(p);
  }
  SUBCASE("missing file is an I/O error") {
    CHECK(run_cli({"collapse", "--voxels", "/nonexistent/k.voxs"}).code == 6);
  }
  SUBCASE("usage errors") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"bracket"}).code == 2);
    CHECK(run_cli({"bracket", "--in", "expr:sin(2πx)"}).code == 2);
    CHECK(run_cli({"bracket", "--in", "expr:x", "expr:y"}).code == 2);
    CHECK(run_cli({"bracket", "--in", "expr:sin(2πx)", "expr:sin(2πy)", "--resolution", "100"}).code == 2);
    CHECK(run_cli({"approximate", "--in", "expr:sin(2πx)", "expr:sin(2πy)", "--eps", "0.5"}).code == 2);
  }
  SUBCASE("thickness of an empty set") {
    const std::string in = temp_path("empty2.voxs");
    write_voxset(in, VoxelSet(2, 0.1, {0.0, 0.0}, {}));
    const Result r = run_cli({"thickness", "--voxels", in});
    CHECK(r.code == 2);
    CHECK(r.err.find("use identity; thickness 0") != std::string::npos);
    std::filesystem::remove(in);
  }
  SUBCASE("help") { CHECK(run_cli({"--help"}).code == 0); }
}

TEST_CASE("cli approximate, verify and determinism") {
  const std::string report = temp_path("approx.json");
  const std::string again = temp_path("approx2.json");
  const std::string prefix = temp_path("Fprime");
  const std::string vox = temp_path("K.voxs");
  const std::vector<std::string> args{"approximate", "--in", "expr:0.01*sin(2πx)", "expr:sin(2πy)",
                                      "--resolution", "64", "--voxel-size", "0.015625", "--out-prefix",
                                      prefix, "--voxels-out", vox};
  std::vector<std::string> a1 = args, a2 = args;
  a1.insert(a1.end(), {"--report", report});
  a2.insert(a2.end(), {"--report", again});
  REQUIRE(run_cli(a1).code == 0);
  REQUIRE(run_cli(a2).code == 0);
  CHECK(read_file(report) == read_file(again));
  CHECK(read_fgrid(prefix + "1.fgrd").size() == 64 * 64);
  CHECK(read_fgrid(prefix + "2.fgrd").size() == 64 * 64);
  const VoxelSet k = read_voxset(vox);
  const Json j = Json::parse(read_file(report));
  CHECK(j["report"]["measure_K"].get<double>() == k.measure());
  CHECK(j["report"]["certified"] == true);

  const Result v = run_cli({"verify", "--report", report});
  CHECK(v.code == 0);
  CHECK(Json::parse(v.out)["matches"] == true);

  // A tampered number no longer matches the re-run.
  Json t = j;
  t["report"]["max_displacement"] = 1e-9;
  write_file(again, t.dump(2));
  CHECK(run_cli({"verify", "--report", again}).code == 4);

  write_file(again, "{ not json");
  CHECK(run_cli({"verify", "--report", again}).code == 3);
  write_file(again, "{}");
  CHECK(run_cli({"verify", "--report", again}).code == 3);

  for (const std::string& p : {report, again, prefix + "1.fgrd", prefix + "2.fgrd", vox})
    std::filesystem::remove(p);
}

TEST_CASE("cli collapse with graph output and seeds") {
  const std::string in = temp_path("k.voxs");
  write_voxset(in, commute::testing::random_voxels(2, 0.05, 3));
  const std::string graph = temp_path("graph.csv");
  const Result a = run_cli({"collapse", "--voxels", in, "--seed", "5", "--samples", "12", "--graph-out", graph});
  const Result b = run_cli({"collapse", "--voxels", in, "--seed", "5", "--samples", "12"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const Json j = Json::parse(a.out);
  CHECK(j["displacement"]["certified"] == true);
  CHECK(read_file(graph).rfind("x,y,phi_x,phi_y\n", 0) == 0);
  CHECK(run_cli({"collapse", "--voxels", in, "--samples", "4"}).code == 2);

  const Result t = run_cli({"thickness", "--voxels", in});
  REQUIRE(t.code == 0);
  CHECK(Json::parse(t.out)["thickness"]["certified"] == true);
  std::filesystem::remove(in);
  std::filesystem::remove(graph);
}

TEST_CASE("cli sequence manifest") {
  const std::string manifest = temp_path("seq.txt");
  const std::string field = temp_path("seq_g.fgrd");
  write_fgrid(field, sample_field(TorusDomain::uniform(2, 64), "sin(2πy)"));
  write_file(manifest, "# F ; G\nexpr:sin(2πx) ; " + std::filesystem::path(field).filename().string() +
                           "\n\nexpr:0.5*sin(2πx) ; expr:sin(2πy)\n");
  const Result r = run_cli({"sequence", "--manifest", manifest, "--resolution", "64", "--voxel-size", "0.015625"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  REQUIRE(j["entries"].size() == 2);
  CHECK(j["entries"][0]["epsilon"].get<double>() == doctest::Approx(8.0).epsilon(0.02));
  CHECK(j["entries"][1]["epsilon"].get<double>() == doctest::Approx(4.0).epsilon(0.02));
  CHECK(j["all_ok"] == true);

  write_file(manifest, "expr:sin(2πx) expr:sin(2πy)\n");
  CHECK(run_cli({"sequence", "--manifest", manifest}).code == 3);
  std::filesystem::remove(manifest);
  std::filesystem::remove(field);
}

TEST_CASE("cli config file") {
  const std::string conf = temp_path("run.ini");
  write_file(conf, "[bracket]\nresolution=32\n");
  const Result r = run_cli({"--config", conf, "bracket", "--in", "expr:sin(2πx)", "expr:sin(2πy)"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["domain"]["resolution"][0] == 32);
  std::filesystem::remove(conf);
}
