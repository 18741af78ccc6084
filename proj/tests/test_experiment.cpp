#include <doctest.h>

#include <fstream>

#include "oracles.hpp"
#include "polaron/experiment.hpp"

using namespace polaron;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("polaron_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("config parsing and validation") {
    const char* text = R"({
        "kind": "travel",
        "grid": {"n": 32, "length": 16.0},
        "potential": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0},
        "velocity": [0, 0, 0.5],
        "integrator": {"dt": 0.05, "T": 5.0}
    })";
    ExperimentConfig cfg = ExperimentConfig::from_json_text(text);
    CHECK(cfg.n == 32);
    CHECK(cfg.box == 16.0);
    CHECK(cfg.velocity.z == 0.5);
    cfg.validate();

    ExperimentConfig bad = cfg;
    bad.n = 7;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.dt = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.kind = ExperimentKind::Supersonic;
    bad.supersonic.velocity = {0, 0, 0.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(kind_from_name("bogus"), std::invalid_argument);

    // resolved config reparses to the same values
    ExperimentConfig re = ExperimentConfig::from_json_text(cfg.resolved_json());
    CHECK(re.n == cfg.n);
    CHECK(re.velocity.z == cfg.velocity.z);
    CHECK(re.kernel.dt == cfg.kernel.dt);
}

TEST_CASE("fit_temporal_decay on synthetic series") {
    std::vector<double> t, v;
    for (int i = 0; i <= 200; ++i) {
        t.push_back(0.1 * i);
        v.push_back(2.0 * std::pow(1.0 + t.back(), -3.0));
    }
    DecayFit fit = fit_temporal_decay(t, v, 0.0, 20.0);
    CHECK(fit.exponent == doctest::Approx(-3.0).epsilon(0.0067));
    CHECK(fit.goodness > 0.999);
    CHECK_THROWS_AS(fit_temporal_decay(t, v, 19.9, 20.0), std::invalid_argument);
}

TEST_CASE("PLF1 snapshot roundtrip") {
    GridPtr g = make_grid(16, 8.0);
    ComplexField f(g, Representation::Physical);
    std::mt19937 rng(9);
    std::normal_distribution<double> gs;
    for (auto& v : f.data()) v = cplx(gs(rng), gs(rng));
    fs::path dir = temp_dir("plf1");
    write_field_plf1(dir / "f.plf1", f, 2.5);

    double t = 0.0;
    ComplexField back = read_field_plf1(dir / "f.plf1", &t);
    CHECK(t == 2.5);
    CHECK(back.grid()->n() == 16);
    CHECK(back.grid()->length() == 8.0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);  // bitwise

    // header layout: magic + u32 + f64 + f64
    std::string raw = slurp(dir / "f.plf1");
    CHECK(raw.substr(0, 4) == "PLF1");
    CHECK(raw.size() == 4 + 4 + 8 + 8 + f.size() * 16);
}

TEST_CASE("travel experiment writes reports and is byte-deterministic") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Travel;
    cfg.n = 32;
    cfg.box = 16.0;
    cfg.velocity = {0, 0, 0.5};
    fs::path d1 = temp_dir("travel1"), d2 = temp_dir("travel2");
    ExperimentResult r1 = run_experiment(cfg, d1);
    ExperimentResult r2 = run_experiment(cfg, d2);
    CHECK(r1.all_pass);
    CHECK(fs::exists(d1 / "report.ndjson"));
    CHECK(fs::exists(d1 / "resolved_config.json"));
    CHECK(fs::exists(d1 / "gamma.plf1"));
    CHECK(slurp(d1 / "report.ndjson") == slurp(d2 / "report.ndjson"));
    CHECK(slurp(d1 / "gamma.plf1") == slurp(d2 / "gamma.plf1"));

    // every line parses as a record with the required keys
    std::ifstream in(d1 / "report.ndjson");
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++lines;
        CHECK(line.find("\"name\"") != std::string::npos);
        CHECK(line.find("\"value\"") != std::string::npos);
        CHECK(line.find("\"threshold\"") != std::string::npos);
        CHECK(line.find("\"pass\"") != std::string::npos);
        CHECK(line.find("\"window\"") != std::string::npos);
    }
    CHECK(lines >= 5);
}

TEST_CASE("travel with v = 0 reports a tiny imaginary part") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Travel;
    cfg.n = 32;
    cfg.box = 16.0;
    cfg.velocity = {0, 0, 0};
    fs::path dir = temp_dir("travel_v0");
    ExperimentResult res = run_experiment(cfg, dir);
    bool found = false;
    for (const auto& r : res.records)
        if (r.name == "im_gamma_norm_v0") {
            found = true;
            CHECK(r.value < 1e-10);
            CHECK(r.pass);
        }
    CHECK(found);
}

TEST_CASE("simulate experiment: trajectory CSV columns") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Simulate;
    cfg.n = 16;
    cfg.box = 8.0;
    cfg.potential.width = 1.0;
    cfg.velocity = {0, 0, 0.3};
    cfg.perturbation.epsilon0 = 0.0;
    cfg.T = 1.0;
    cfg.dt = 0.05;
    cfg.sample_every = 4;
    cfg.snapshot_every = 2;
    fs::path dir = temp_dir("simulate");
    ExperimentResult res = run_experiment(cfg, dir);
    std::ifstream in(dir / "trajectory.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,X1,X2,X3,P1,P2,P3,energy,mom1,mom2,mom3,re_delta_linf,im_delta_linf");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows >= 5);
    CHECK(fs::exists(dir / "field_1.plf1"));
    (void)res;
}

TEST_CASE("sweep fans out into case directories") {
    ExperimentConfig sub;
    sub.kind = ExperimentKind::Travel;
    sub.n = 16;
    sub.box = 8.0;
    sub.velocity = {0, 0, 0.4};

    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Sweep;
    cfg.sweep = {sub, sub};
    cfg.sweep[1].velocity = {0, 0, 0.6};
    fs::path dir = temp_dir("sweep");
    ExperimentResult res = run_experiment(cfg, dir, 2);
    CHECK(fs::exists(dir / "case_0" / "report.ndjson"));
    CHECK(fs::exists(dir / "case_1" / "report.ndjson"));
    CHECK(fs::exists(dir / "report.ndjson"));
    (void)res;
}

TEST_CASE("normalization maps units into the normalized system") {
    // a mu != 1 config runs through the (e) change of units: subsonic means
    // |v| < sqrt(mu) in original units
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Simulate;
    cfg.n = 16;
    cfg.box = 8.0;
    cfg.velocity = {0, 0, 0.8};
    cfg.mu = 4.0;  // sound speed 2, so 0.8 is comfortably subsonic
    cfg.perturbation.epsilon0 = 0.0;
    cfg.T = 0.4;
    cfg.dt = 0.025;
    cfg.sample_every = 4;
    fs::path dir = temp_dir("units");
    ExperimentResult res = run_experiment(cfg, dir);
    CHECK(res.all_pass);
}
