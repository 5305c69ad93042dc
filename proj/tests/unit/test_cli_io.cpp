#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "sbt/cli.hpp"
#include "sbt/config.hpp"
#include "sbt/io.hpp"

using namespace sbt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sbt_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

const char* kProlateGeo = R"({
  "centerline": {"kind": "straight", "direction": [0, 0, 1]},
  "radius": {"kind": "prolate", "epsilon": 0.1},
  "stretch": {"kind": "uniform"},
  "frame": {"step": 0.001}
})";

} // namespace

TEST_CASE("g17 formatting round-trips doubles exactly", "[cli]") {
    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double v = u(rng) * std::pow(10.0, (i % 60) - 30);
        CHECK(parse_double_strict(format_g17(v)) == v);
    }
    CHECK(parse_double_strict(format_g17(0.1)) == 0.1);
    CHECK_THROWS_AS(parse_double_strict("1.0x"), InputError);
}

TEST_CASE("config hash is stable and content-sensitive", "[cli]") {
    const std::string h1 = config_hash("abc");
    CHECK(h1 == config_hash("abc"));
    CHECK(h1 != config_hash("abd"));
    CHECK(h1.size() == 16);
}

TEST_CASE("table writing is atomic with LF endings and a comment header", "[cli]") {
    TempDir tmp;
    OutputTable table;
    table.comments = {"tool x", "config-hash: 00"};
    table.columns = {"a", "b"};
    table.rows = {{format_g17(1.5), format_g17(-0.25)}, {format_g17(2.0), format_g17(1e-17)}};
    const fs::path out = tmp.path / "t.csv";
    write_table(table, out);
    CHECK_FALSE(fs::exists(tmp.path / "t.csv.tmp"));
    std::ifstream in(out, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.rfind("# tool x\n", 0) == 0);

    const CsvData back = read_csv(out);
    REQUIRE(back.columns == std::vector<std::string>{"a", "b"});
    REQUIRE(back.rows.size() == 2);
    CHECK(parse_double_strict(back.rows[1][1]) == 1e-17);
}

TEST_CASE("geometry document round trip", "[cli]") {
    const json j = json::parse(kProlateGeo);
    const GeometryDoc doc = geometry_doc_from_json(j);
    const json j2 = geometry_doc_to_json(doc);
    const GeometryDoc doc2 = geometry_doc_from_json(j2);
    CHECK(doc2.centerline_kind == "straight");
    CHECK(doc2.epsilon == 0.1);
    CHECK(doc2.frame_step == 0.001);
    CHECK(norm(doc2.direction - Vec3{0, 0, 1}) == 0.0);
}

TEST_CASE("strict parsing: unknown keys and bad epsilon rejected", "[cli]") {
    json j = json::parse(kProlateGeo);
    j["radius"]["extra"] = 1;
    CHECK_THROWS_WITH(geometry_doc_from_json(j), Catch::Matchers::ContainsSubstring("extra"));
    json j2 = json::parse(kProlateGeo);
    j2["radius"]["epsilon"] = 0.3;
    CHECK_THROWS_AS(geometry_doc_from_json(j2), InputError);
}

TEST_CASE("malformed JSON reports line and column", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "bad.json", "{\n  \"a\": 1,\n  oops\n}");
    try {
        load_json_file(tmp.path / "bad.json");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("sweep config round trip and validation", "[cli]") {
    json j;
    j["epsilons"] = {0.1, 0.05};
    j["geometry"] = json::parse(kProlateGeo);
    j["force"] = {{"kind", "parabolic"}, {"direction", {1, 0, 0}}};
    j["s_points"] = 9;
    const SweepConfig cfg = sweep_config_from_json(j);
    CHECK(cfg.s_points == 9);
    const json j2 = sweep_config_to_json(cfg);
    const SweepConfig cfg2 = sweep_config_from_json(j2);
    CHECK(cfg2.epsilons == cfg.epsilons);
    CHECK(cfg2.force.kind == "parabolic");

    json bad = j;
    bad["epsilons"] = {0.3};
    CHECK_THROWS_AS(sweep_config_from_json(bad), InputError);
}

TEST_CASE("cli validate-geometry reports four passing conditions", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "prolate01.json", kProlateGeo);
    const fs::path out = tmp.path / "report.json";
    const int code = cli::run({"validate-geometry", "--geometry", (tmp.path / "prolate01.json").string(),
                               "--out", out.string()});
    CHECK(code == 0);
    const json rep = load_json_file(out);
    REQUIRE(rep["conditions"].size() == 4);
    for (const auto& c : rep["conditions"]) CHECK(c["pass"].get<bool>());
    CHECK(rep["pass"].get<bool>());
    CHECK(rep["stretch"]["pass"].get<bool>());
}

TEST_CASE("cli eval writes the expected columns", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "geo.json", kProlateGeo);
    write_file(tmp.path / "pts.csv", "x,y,z\n0.5,0,0\n0,0.4,0.3\n");
    const fs::path out = tmp.path / "res.csv";
    const int code = cli::run({"eval", "--geometry", (tmp.path / "geo.json").string(), "--force",
                               "constant:0,0,1", "--points", (tmp.path / "pts.csv").string(), "--out",
                               out.string()});
    REQUIRE(code == 0);
    const CsvData csv = read_csv(out);
    REQUIRE(csv.columns ==
            std::vector<std::string>{"x", "y", "z", "ux", "uy", "uz", "p", "quad_warn"});
    REQUIRE(csv.rows.size() == 2);
    CHECK(parse_double_strict(csv.rows[0][5]) > 0.0); // uz > 0 for f = +e3
    bool has_hash = false;
    for (const auto& c : csv.comments)
        if (c.rfind("config-hash:", 0) == 0) has_hash = true;
    CHECK(has_hash);
}

TEST_CASE("cli eval rejects interior points", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "geo.json", kProlateGeo);
    write_file(tmp.path / "pts.csv", "x,y,z\n0,0,0\n");
    const int code = cli::run({"eval", "--geometry", (tmp.path / "geo.json").string(), "--points",
                               (tmp.path / "pts.csv").string(), "--out", (tmp.path / "out.csv").string()});
    CHECK(code == 1);
    CHECK_FALSE(fs::exists(tmp.path / "out.csv"));
}

TEST_CASE("cli sweep with a missing config exits 1 without partial output", "[cli]") {
    TempDir tmp;
    const fs::path out = tmp.path / "report.json";
    const int code =
        cli::run({"sweep", "--config", (tmp.path / "missing.json").string(), "--out", out.string()});
    CHECK(code == 1);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("cli fit on synthetic eps data", "[cli]") {
    TempDir tmp;
    std::string csv = "eps,err\n";
    for (double e : {0.1, 0.05, 0.025, 0.0125}) csv += format_g17(e) + "," + format_g17(e) + "\n";
    write_file(tmp.path / "synthetic_eps.csv", csv);
    const int code = cli::run({"fit", "--in", (tmp.path / "synthetic_eps.csv").string(), "--model", "pow"});
    CHECK(code == 0);
}

TEST_CASE("identical config produces identical output bodies", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "geo.json", kProlateGeo);
    write_file(tmp.path / "pts.csv", "x,y,z\n0.5,0,0\n0,0.4,0.3\n-0.2,0.3,0.9\n");
    auto body_of = [](const fs::path& p) {
        std::ifstream in(p);
        std::string line, body;
        while (std::getline(in, line))
            if (line.empty() || line[0] != '#') body += line + "\n";
        return body;
    };
    for (const char* name : {"a.csv", "b.csv"}) {
        const int code = cli::run({"eval", "--geometry", (tmp.path / "geo.json").string(), "--force",
                                   "parabolic:1,0,0", "--points", (tmp.path / "pts.csv").string(), "--out",
                                   (tmp.path / name).string()});
        REQUIRE(code == 0);
    }
    CHECK(body_of(tmp.path / "a.csv") == body_of(tmp.path / "b.csv"));
}

TEST_CASE("cli unknown subcommand exits 1", "[cli]") {
    CHECK(cli::run({"frobnicate"}) == 1);
    CHECK(cli::run({}) == 1);
}

TEST_CASE("cli residuals runs on a coarse grid", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "geo.json", kProlateGeo);
    const fs::path out = tmp.path / "residuals.csv";
    const int code = cli::run({"residuals", "--geometry", (tmp.path / "geo.json").string(), "--force",
                               "parabolic:1,0,0", "--epsilon", "0.1", "--out", out.string(), "--s-points",
                               "5", "--theta-nodes", "32"});
    REQUIRE(code == 0);
    const CsvData csv = read_csv(out);
    REQUIRE(csv.columns == std::vector<std::string>{"s", "theta_residual_sup", "fres_x", "fres_y",
                                                    "fres_z", "centerline_gap"});
    CHECK(csv.rows.size() == 5);
}

TEST_CASE("cli sweep writes a report and per-epsilon tables", "[cli]") {
    TempDir tmp;
    json cfg;
    cfg["epsilons"] = {0.1, 0.05};
    cfg["geometry"] = json::parse(kProlateGeo);
    cfg["force"] = {{"kind", "parabolic"}, {"direction", {1, 0, 0}}};
    cfg["s_points"] = 5;
    cfg["quad"] = {{"theta_nodes", 32}};
    cfg["threads"] = 1;
    write_file(tmp.path / "sweep.json", cfg.dump(2));
    const fs::path out = tmp.path / "report.json";
    const int code = cli::run({"sweep", "--config", (tmp.path / "sweep.json").string(), "--out",
                               out.string()});
    REQUIRE(code == 0);
    const json rep = load_json_file(out);
    REQUIRE(rep["rows"].size() == 2);
    CHECK(rep["rows"][0]["theta_sup"].get<double>() > rep["rows"][1]["theta_sup"].get<double>());
    CHECK(rep.contains("config_hash"));
    CHECK(fs::exists(tmp.path / "report_eps0.csv"));
    CHECK(fs::exists(tmp.path / "report_eps1.csv"));
    const CsvData csv = read_csv(tmp.path / "report_eps0.csv");
    CHECK(csv.rows.size() == 5);
    // fit-ready tables feed straight into the fit subcommand
    REQUIRE(fs::exists(tmp.path / "report_theta.csv"));
    const int fit_code = cli::run({"fit", "--in", (tmp.path / "report_theta.csv").string(), "--model",
                                   "powlog"});
    CHECK(fit_code == 1); // two epsilons only: the fit needs >= 3 pairs
    json cfg3 = cfg;
    cfg3["epsilons"] = {0.1, 0.05, 0.025};
    write_file(tmp.path / "sweep3.json", cfg3.dump(2));
    REQUIRE(cli::run({"sweep", "--config", (tmp.path / "sweep3.json").string(), "--out",
                      (tmp.path / "r3.json").string()}) == 0);
    CHECK(cli::run({"fit", "--in", (tmp.path / "r3_gap.csv").string(), "--model", "powlog"}) == 0);
}

TEST_CASE("spline geometry document end to end", "[cli]") {
    TempDir tmp;
    json geo;
    json nodes = json::array();
    for (int i = 0; i < 5; ++i) {
        const double t = -1.6 + 0.8 * i;
        nodes.push_back({0.25 * std::cos(t) + 0.01 * i, 0.25 * std::sin(t), t});
    }
    geo["centerline"] = {{"kind", "spline"}, {"nodes", nodes}};
    geo["radius"] = {{"kind", "prolate"}, {"epsilon", 0.05}};
    write_file(tmp.path / "spline.json", geo.dump(2));
    const fs::path out = tmp.path / "report.json";
    const int code = cli::run({"validate-geometry", "--geometry", (tmp.path / "spline.json").string(),
                               "--out", out.string()});
    REQUIRE(code == 0);
    const json rep = load_json_file(out);
    CHECK(rep["pass"].get<bool>());
    CHECK(rep["geometry_constants"]["kappa_max"].get<double>() > 0.0);
}

TEST_CASE("self-intersecting spline document exits with the geometry code", "[cli]") {
    TempDir tmp;
    json geo;
    geo["centerline"] = {{"kind", "spline"},
                         {"nodes", {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 0}}}};
    geo["radius"] = {{"kind", "prolate"}, {"epsilon", 0.05}};
    write_file(tmp.path / "bad.json", geo.dump(2));
    const int code = cli::run({"validate-geometry", "--geometry", (tmp.path / "bad.json").string()});
    CHECK(code == 2);
}

TEST_CASE("SBT_LAB_THREADS overrides the requested thread count", "[cli]") {
    setenv("SBT_LAB_THREADS", "3", 1);
    CHECK(resolve_threads(1) == 3);
    unsetenv("SBT_LAB_THREADS");
    CHECK(resolve_threads(2) == 2);
}

TEST_CASE("cli lemma-check integral_est", "[cli]") {
    TempDir tmp;
    const fs::path out = tmp.path / "lemma.csv";
    const int code = cli::run({"lemma-check", "--lemma", "integral_est", "--m", "0", "--n", "1",
                               "--epsilon", "0.1", "--epsilon", "0.05", "--out", out.string()});
    REQUIRE(code == 0);
    const CsvData csv = read_csv(out);
    CHECK(csv.rows.size() == 42); // 21-point grid x 2 epsilons
    for (const auto& row : csv.rows) CHECK(row.back() == "1");
}
