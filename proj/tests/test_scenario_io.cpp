#include "doctest.h"

#include "chirpcal/io.hpp"
#include "chirpcal/scenario.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace chirpcal;
namespace fs = std::filesystem;

namespace {

ChirpParams fast_params() {
    ChirpParams p;
    p.chirp_rate = 7.992007992007992e13;
    p.center_frequency = -40e6;
    p.pulse_duration = 1.001e-6;
    p.sample_rate = 64e6;
    p.pri = 20e-6;
    return p;
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("chirpcal_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void dump_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/* A config with every field moved off its default, for parse/serialize
 * coverage of the whole surface. */
ScenarioConfig full_coverage_config() {
    ScenarioConfig c;
    c.amplitude = 2.5;
    c.bandwidth_hz = 40.0e6;
    c.center_frequency_hz = -20.0e6;
    c.phase_rad = 0.3;
    c.pulse_duration_s = 2.002e-6;
    c.sample_rate_hz = 175.0e6;
    c.pri_s = 25.0e-6;
    c.freq_term = FreqTermConvention::PaperPi;
    c.snr_db = std::nullopt;
    c.temperature_step_c = 0.5;
    c.t_min_c = 19.0;
    c.t_max_c = 29.0;
    c.seed = 42;
    c.p1 = {-28.0, 0.1, 11.0e-9};
    c.p2 = {-18.0, -0.2, 8.0e-9};
    c.p3 = {0.5, 0.05, 5.0e-9};
    c.hpa = {28.0, 0.3, {{19, 0}, {24, -0.1}, {29, -0.4}}, {{19, 0}, {29, -20.0}}};
    c.lna = {18.0, -0.1, {{19, 0}, {29, -0.5}}, {{19, 0}, {29, -10.0}}};
    c.t_ref_c = 19.0;
    c.pulses_per_dwell = 4;
    c.optimizer.algorithm = Algorithm::MomentumGD;
    c.optimizer.stepsize = 2.0e-4;
    c.optimizer.beta1 = 0.85;
    c.optimizer.beta2 = 0.995;
    c.optimizer.epsilon = 1.0e-9;
    c.optimizer.momentum = 0.8;
    c.optimizer.max_epochs = 500;
    c.optimizer.convergence_ratio = 0.05;
    c.optimizer.bias_correction = BiasCorrectionMode::PaperLiteral;
    c.offsets_mode = OffsetsMode::External;
    c.hpa_nominal_gain_db = 28.0;
    c.hpa_nominal_phase_rad = 0.3;
    c.lna_nominal_gain_db = 18.0;
    c.lna_nominal_phase_rad = -0.1;
    c.p1_offset = {-27.5, 0.1};
    c.p2_offset = {-17.5, -0.2};
    c.gate_gain_db = 0.1;
    c.gate_phase_deg = 3.0;
    c.bench_gain_db = -10.0;
    c.bench_phase_rad = 0.9;
    c.bench_snr_db = std::nullopt;
    c.bench_seeds = 6;
    c.out_directory = "runs";
    c.formats = {"json", "bin"};
    return c;
}

ConfigError capture_config_error(const std::string& text) {
    try {
        (void)parse_scenario(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected ConfigError");
    return ConfigError("unreachable");
}

} // namespace

/* ---- scenario config ------------------------------------------------------ */

TEST_CASE("scenario serialization round-trips the default and a full-coverage config") {
    const ScenarioConfig def;
    CHECK(parse_scenario(serialize_scenario(def)) == def);

    const ScenarioConfig full = full_coverage_config();
    const ScenarioConfig reparsed = parse_scenario(serialize_scenario(full));
    CHECK(reparsed == full);

    // Canonical text is a fixed point of parse -> serialize.
    const std::string text = serialize_scenario(full);
    CHECK(serialize_scenario(parse_scenario(text)) == text);
}

TEST_CASE("scenario hash is 16 lowercase hex digits and tracks content") {
    const ScenarioConfig def;
    const std::string h = scenario_hash(def);
    REQUIRE(h.size() == 16);
    for (char ch : h)
        CHECK(((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f')));

    ScenarioConfig copy = def;
    CHECK(scenario_hash(copy) == h);
    copy.seed = 2;
    CHECK(scenario_hash(copy) != h);
}

TEST_CASE("scenario parser accepts comments, blank lines, and CRLF endings") {
    const std::string text = "# leading comment\r\n"
                             "[chirp]\r\n"
                             "amplitude = 2 # trailing comment\r\n"
                             "\r\n"
                             "[output]\r\n"
                             "formats = csv\r\n";
    const ScenarioConfig c = parse_scenario(text);
    CHECK(c.amplitude == 2.0);
    REQUIRE(c.formats.size() == 1);
    CHECK(c.formats[0] == "csv");
    // Untouched fields keep their defaults.
    CHECK(c.sample_rate_hz == ScenarioConfig{}.sample_rate_hz);
}

TEST_CASE("snr fields accept 'off' for disabled noise") {
    ScenarioConfig c = parse_scenario("[network]\nsnr_db = off\n[benchmark]\nsnr_db = off\n");
    CHECK(!c.snr_db.has_value());
    CHECK(!c.bench_snr_db.has_value());
    const std::string text = serialize_scenario(c);
    CHECK(text.find("snr_db = off") != std::string::npos);
}

TEST_CASE("scenario parser reports the offending line") {
    ConfigError e = capture_config_error("[bogus]\n");
    CHECK(e.line == 1);
    CHECK(std::string(e.what()).find("unknown section [bogus]") != std::string::npos);

    e = capture_config_error("[chirp\n");
    CHECK(e.line == 1);
    CHECK(std::string(e.what()).find("unterminated section header") != std::string::npos);

    e = capture_config_error("[chirp]\namplitude = fast\n");
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("expected a finite number") != std::string::npos);

    e = capture_config_error("[chirp]\nwavelength = 3\n");
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("unknown key 'wavelength' in section [chirp]") !=
          std::string::npos);

    e = capture_config_error("amplitude = 1\n");
    CHECK(e.line == 1);
    CHECK(std::string(e.what()).find("key outside any section") != std::string::npos);

    e = capture_config_error("[chirp]\ngarbage\n");
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("expected 'key = value'") != std::string::npos);

    e = capture_config_error("[network.hpa]\ngain_drift_db = 20\n");
    CHECK(e.line == 2);
    CHECK(std::string(e.what()).find("knot entries must look like 'temperature:value'") !=
          std::string::npos);

    e = capture_config_error("[network.hpa]\ngain_drift_db = 20:0\n");
    CHECK(std::string(e.what()).find("need at least 2 drift knots") != std::string::npos);

    e = capture_config_error("[chirp]\nfreq_term = half_pi\n");
    CHECK(std::string(e.what()).find("freq_term must be two_pi or paper_pi") !=
          std::string::npos);

    e = capture_config_error("[network]\nseed = abc\n");
    CHECK(std::string(e.what()).find("expected a non-negative integer") != std::string::npos);
}

TEST_CASE("scenario validation rejects contradictory settings") {
    ScenarioConfig c;
    c.pulses_per_dwell = 0;
    CHECK_THROWS_WITH_AS(c.validate(), "sweep: pulses_per_dwell must be > 0", ConfigError);

    c = ScenarioConfig{};
    c.bench_seeds = 0;
    CHECK_THROWS_WITH_AS(c.validate(), "benchmark: seeds must be > 0", ConfigError);

    c = ScenarioConfig{};
    c.gate_gain_db = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), "calibration: gate thresholds must be > 0", ConfigError);

    c = ScenarioConfig{};
    c.formats = {"xml"};
    CHECK_THROWS_WITH_AS(c.validate(), "output: unknown format 'xml'", ConfigError);

    c = ScenarioConfig{};
    c.formats.clear();
    CHECK_THROWS_WITH_AS(c.validate(), "output: at least one format required", ConfigError);
}

TEST_CASE("load_scenario_file prefixes errors with the path") {
    TempDir dir;
    CHECK_THROWS_AS(load_scenario_file(dir.path / "absent.cfg"), ConfigError);

    const fs::path bad = dir.path / "bad.cfg";
    dump_text(bad, "[chirp]\namplitude = oops\n");
    try {
        (void)load_scenario_file(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find(bad.string()) != std::string::npos);
        CHECK(what.find("line 2") != std::string::npos);
    }
}

TEST_CASE("derived chirp parameters and the benchmark scenario mirror the config") {
    const ScenarioConfig c;
    const ChirpParams p = c.chirp_params();
    CHECK(p.chirp_rate == 80.0e6 / 1.001e-6);
    CHECK(p.sample_rate == 350.0e6);
    CHECK(p.pri == 20.0e-6);
    CHECK(p.convention == FreqTermConvention::TwoPi);

    const LearningSpeedScenario bench = c.bench_scenario();
    CHECK(bench.true_gain_db == c.bench_gain_db);
    CHECK(bench.true_phase == c.bench_phase_rad);
    CHECK(bench.snr_db == c.bench_snr_db);
    CHECK(bench.label == scenario_hash(c));
    CHECK(bench.base_config.max_epochs == c.optimizer.max_epochs);
}

/* ---- doubles and waveform files ------------------------------------------- */

TEST_CASE("format_double round-trips doubles exactly") {
    const double values[] = {0.1, 1.0 / 3.0, 3.141592653589793, 1e-300, 6.02214076e23, -0.0};
    for (double v : values) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("signal CSV round-trips samples bitwise and recovers the rate") {
    TempDir dir;
    const ChirpParams p = fast_params();
    SampledSignal sig = add_awgn(generate_chirp(p), 20.0, 5);
    const fs::path file = dir.path / "sig.csv";
    write_signal_csv(file, sig);

    const SampledSignal hinted = read_signal_csv(file, p.sample_rate);
    CHECK(hinted.sample_rate == p.sample_rate); // within 1 ppm: hint adopted verbatim
    CHECK(hinted.start_time == 0.0);
    REQUIRE(hinted.size() == sig.size());
    for (std::size_t i = 0; i < sig.size(); ++i)
        CHECK(hinted.samples[i] == sig.samples[i]);

    const SampledSignal bare = read_signal_csv(file);
    CHECK(bare.sample_rate == doctest::Approx(p.sample_rate).epsilon(1e-9));

    const SampledSignal far = read_signal_csv(file, 32.0e6); // hint off by 2x: ignored
    CHECK(far.sample_rate == doctest::Approx(p.sample_rate).epsilon(1e-9));

    sig.start_time = 2.5e-7;
    write_signal_csv(file, sig);
    CHECK(read_signal_csv(file, p.sample_rate).start_time == 2.5e-7);
}

TEST_CASE("signal CSV reader rejects malformed files") {
    TempDir dir;
    const fs::path file = dir.path / "sig.csv";

    dump_text(file, "foo\n0,0,1,0\n");
    CHECK_THROWS_AS(read_signal_csv(file), IoError);

    dump_text(file, "index,t_seconds,i,q\n0,0,1,0\n");
    try {
        (void)read_signal_csv(file);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("at least two samples") != std::string::npos);
    }

    dump_text(file, "index,t_seconds,i,q\n0,0,1,0\n1,0,1,0\n");
    CHECK_THROWS_AS(read_signal_csv(file), IoError); // time not increasing

    dump_text(file, "index,t_seconds,i,q\n0,0,1,0\n5,1e-8,1,0\n");
    CHECK_THROWS_AS(read_signal_csv(file), IoError); // index out of order

    dump_text(file, "index,t_seconds,i,q\n0,0,zz,0\n1,1e-8,1,0\n");
    try {
        (void)read_signal_csv(file);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        const std::string what = e.what();
        CHECK(what.find(file.string() + ":2:") != std::string::npos);
        CHECK(what.find("not a number") != std::string::npos);
    }

    CHECK_THROWS_AS(read_signal_csv(dir.path / "absent.csv"), IoError);
    CHECK_THROWS_AS(write_signal_csv(dir.path / "no_dir" / "sig.csv", SampledSignal{}),
                    IoError);
}

TEST_CASE("history CSV round-trips exactly") {
    TempDir dir;
    const fs::path file = dir.path / "history.csv";
    const std::vector<double> history{0.5, 0.25, 1.25e-17, 3.0};
    write_history_csv(file, history);
    CHECK(read_history_csv(file) == history);

    write_history_csv(file, {});
    CHECK(read_history_csv(file).empty());

    dump_text(file, "epoch,E\n0,1\n2,0.5\n");
    CHECK_THROWS_AS(read_history_csv(file), IoError); // epoch out of order
}

/* ---- capture sweeps -------------------------------------------------------- */

namespace {

std::vector<CaptureSet> small_sweep() {
    ScenarioConfig cfg;
    cfg.t_max_c = 20.4; // three dwell temperatures
    cfg.snr_db = 25.0;
    return thermal_sweep(cfg.chirp_params(), cfg.network_model(), 2);
}

void check_sweep_equal(const std::vector<CaptureSet>& original,
                       const std::vector<CaptureSet>& reloaded, bool carries_timing,
                       double fallback_rate) {
    REQUIRE(reloaded.size() == original.size());
    for (std::size_t s = 0; s < original.size(); ++s) {
        CHECK(reloaded[s].temperature == original[s].temperature);
        REQUIRE(reloaded[s].captures.size() == original[s].captures.size());
        for (std::size_t r = 0; r < original[s].captures.size(); ++r) {
            const CaptureRecord& a = original[s].captures[r];
            const CaptureRecord& b = reloaded[s].captures[r];
            CHECK(b.path == a.path);
            CHECK(b.pulse_index == a.pulse_index);
            CHECK(b.temperature == a.temperature);
            if (carries_timing) {
                CHECK(b.pulse.sample_rate == a.pulse.sample_rate);
                CHECK(b.pulse.start_time == a.pulse.start_time);
            } else {
                CHECK(b.pulse.sample_rate == fallback_rate);
                CHECK(b.pulse.start_time == 0.0);
            }
            REQUIRE(b.pulse.size() == a.pulse.size());
            for (std::size_t i = 0; i < a.pulse.size(); ++i)
                CHECK(b.pulse.samples[i] == a.pulse.samples[i]);
            // Applied distortions are simulator-side truth; no exported
            // format may carry them back in.
            CHECK(!b.truth.has_value());
        }
    }
}

} // namespace

TEST_CASE("capture sweeps round-trip through csv, bin, and json") {
    TempDir dir;
    const std::vector<CaptureSet> sweep = small_sweep();
    REQUIRE(!sweep.empty());
    REQUIRE(sweep[0].captures[0].truth.has_value()); // simulator kept its oracle
    CHECK(sweep[0].captures[0].pulse.start_time == 0.0);
    const double rate = sweep[0].captures[0].pulse.sample_rate;

    const fs::path csv = dir.path / "captures.csv";
    write_captures_csv(csv, sweep);
    check_sweep_equal(sweep, read_captures_csv(csv, rate), false, rate);

    const fs::path bin = dir.path / "captures.bin";
    write_captures_bin(bin, sweep);
    check_sweep_equal(sweep, read_captures_bin(bin), true, rate);

    const fs::path json = dir.path / "captures.json";
    write_captures_json(json, sweep);
    check_sweep_equal(sweep, read_captures_json(json), true, rate);

    // The text forms never mention the applied distortions either.
    const std::string json_text = slurp(json);
    CHECK(json_text.find("truth") == std::string::npos);
    CHECK(json_text.find("gain_db") == std::string::npos);
}

TEST_CASE("binary capture reader verifies framing") {
    TempDir dir;
    const std::vector<CaptureSet> sweep = small_sweep();
    const fs::path bin = dir.path / "captures.bin";
    write_captures_bin(bin, sweep);
    const std::string good = slurp(bin);

    dump_text(bin, "NOTACAPS" + good.substr(8));
    try {
        (void)read_captures_bin(bin);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
    }

    dump_text(bin, good.substr(0, good.size() - 5));
    try {
        (void)read_captures_bin(bin);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }

    dump_text(bin, good + std::string(1, '\0'));
    try {
        (void)read_captures_bin(bin);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("trailing bytes") != std::string::npos);
    }

    write_captures_bin(bin, {});
    try {
        (void)read_captures_bin(bin);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("no capture records") != std::string::npos);
    }
}

TEST_CASE("csv capture reader verifies its inputs") {
    TempDir dir;
    const fs::path csv = dir.path / "captures.csv";

    write_captures_csv(csv, {});
    CHECK_THROWS_AS(read_captures_csv(csv, 64e6), IoError); // header only

    const std::vector<CaptureSet> sweep = small_sweep();
    write_captures_csv(csv, sweep);
    CHECK_THROWS_AS(read_captures_csv(csv, 0.0), IoError);
    CHECK_THROWS_AS(read_captures_csv(csv, -1.0), IoError);

    dump_text(csv, "temperature,path,pulse_index,sample_index,i,q\n20,P9,0,0,1,0\n");
    try {
        (void)read_captures_csv(csv, 64e6);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    dump_text(csv, "temperature,path,pulse_index,sample_index,i,q\n20,P1,0,3,1,0\n");
    try {
        (void)read_captures_csv(csv, 64e6);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("sample_index out of order") != std::string::npos);
    }
}

TEST_CASE("json capture reader rejects structural damage") {
    TempDir dir;
    const fs::path json = dir.path / "captures.json";

    dump_text(json, "{ not json");
    CHECK_THROWS_AS(read_captures_json(json), IoError);

    dump_text(json, "{\"captures\": []}");
    try {
        (void)read_captures_json(json);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("no capture records") != std::string::npos);
    }

    dump_text(json, R"({"captures": [{"temperature_c": 20, "path": "P1", "pulse_index": 0,
        "sample_rate_hz": 64e6, "start_time_s": 0, "i": [1, 2], "q": [0]}]})");
    try {
        (void)read_captures_json(json);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("i/q arrays differ in length") != std::string::npos);
    }

    dump_text(json, R"({"captures": [{"path": "P1"}]})");
    CHECK_THROWS_AS(read_captures_json(json), IoError); // missing keys
}

/* ---- calibration tables ----------------------------------------------------- */

TEST_CASE("calibration CSV round-trips records and rebuilds derived fields") {
    TempDir dir;
    CalibrationRecord a;
    a.element = Element::HPA;
    a.temperature = 25.0;
    a.gain_db = 29.7;
    a.phase = 0.31;
    a.k_db = 0.3;
    a.k_linear = db_to_linear(0.3);
    a.theta = 0.04;
    a.ref_gain_db = a.gain_db + a.k_db;
    a.ref_phase = wrap_phase(a.phase + a.theta);
    a.comp_gain_db = a.gain_db + a.k_db;
    a.comp_phase = wrap_phase(a.phase + a.theta);

    CalibrationRecord b = a;
    b.element = Element::LNA;
    b.temperature = 30.0;
    b.gain_db = 19.51;
    b.phase = -3.0; // wraps once theta is added
    b.theta = -0.3;
    b.ref_phase = wrap_phase(b.phase + b.theta);
    b.comp_phase = wrap_phase(b.phase + b.theta);

    const fs::path csv = dir.path / "calibration.csv";
    const std::vector<CalibrationRecord> records{a, b};
    write_calibration_csv(csv, records);
    const std::vector<CalibrationRecord> back = read_calibration_csv(csv);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        const CalibrationRecord& orig = records[i];
        const CalibrationRecord& rec = back[i];
        CHECK(rec.element == orig.element);
        CHECK(rec.temperature == orig.temperature);
        CHECK(rec.gain_db == orig.gain_db);
        CHECK(rec.k_db == orig.k_db);
        CHECK(rec.comp_gain_db == orig.comp_gain_db);
        // Phases pass through a radians->degrees->radians conversion.
        CHECK(rec.phase == doctest::Approx(orig.phase).epsilon(1e-14));
        CHECK(rec.theta == doctest::Approx(orig.theta).epsilon(1e-14));
        CHECK(circular_distance(rec.comp_phase, orig.comp_phase) < 1e-14);
        // Derived fields are reconstructed from what the table stores.
        CHECK(rec.k_linear == db_to_linear(rec.k_db));
        CHECK(rec.ref_gain_db == rec.gain_db + rec.k_db);
        CHECK(rec.ref_phase == wrap_phase(rec.phase + rec.theta));
    }

    dump_text(csv, "element,temperature_C,G_meas_dB,phi_meas_deg,k_dB,theta_deg,G_comp_dB,"
                   "phi_comp_deg\nXPA,25,30,0,0,0,30,0\n");
    CHECK_THROWS_AS(read_calibration_csv(csv), IoError); // unknown element
}

TEST_CASE("residual summary CSV is written with fixed rows") {
    TempDir dir;
    ResidualSummary summary;
    summary.hpa = {0.5, 1.25, 0.25, 0.0625};
    summary.lna = {1.0, 2.0, 3.0, 4.0};
    const fs::path csv = dir.path / "residual_summary.csv";
    write_residual_summary_csv(csv, summary);
    CHECK(slurp(csv) == "element,uncomp_gain_db,uncomp_phase_deg,comp_gain_db,comp_phase_deg\n"
                        "HPA,0.5,1.25,0.25,0.0625\n"
                        "LNA,1,2,3,4\n");
}

TEST_CASE("calibration JSON carries full precision and the residual block") {
    TempDir dir;
    CalibrationRecord rec;
    rec.element = Element::LNA;
    rec.temperature = 22.2;
    rec.gain_db = 19.87;
    rec.phase = -0.21;
    rec.ref_gain_db = 20.0;
    rec.ref_phase = -0.2;
    rec.k_db = 0.13;
    rec.k_linear = db_to_linear(0.13);
    rec.theta = 0.01;
    rec.comp_gain_db = 20.0;
    rec.comp_phase = -0.2;

    ResidualSummary summary;
    summary.hpa = {0.43, 31.73, 0.01, 0.5};

    const fs::path file = dir.path / "calibration.json";
    write_calibration_json(file, std::vector<CalibrationRecord>{rec}, summary);

    const nlohmann::json j = nlohmann::json::parse(slurp(file));
    CHECK(j.at("tool").get<std::string>() == std::string(kToolName));
    CHECK(j.at("version").get<std::string>() == std::string(kToolVersion));
    REQUIRE(j.at("records").size() == 1);
    const auto& r = j.at("records").at(0);
    CHECK(r.at("element").get<std::string>() == "LNA");
    CHECK(r.at("temperature_c").get<double>() == 22.2);
    CHECK(r.at("gain_db").get<double>() == 19.87);
    CHECK(r.at("phase_rad").get<double>() == -0.21);
    CHECK(r.at("ref_gain_db").get<double>() == 20.0);
    CHECK(r.at("ref_phase_rad").get<double>() == -0.2);
    CHECK(r.at("k_db").get<double>() == 0.13);
    CHECK(r.at("k_linear").get<double>() == db_to_linear(0.13));
    CHECK(r.at("theta_rad").get<double>() == 0.01);
    CHECK(r.at("comp_gain_db").get<double>() == 20.0);
    CHECK(r.at("comp_phase_rad").get<double>() == -0.2);
    CHECK(j.at("residuals").at("hpa").at("uncomp_gain_db").get<double>() == 0.43);
    CHECK(j.at("residuals").at("hpa").at("uncomp_phase_deg").get<double>() == 31.73);
    CHECK(j.at("residuals").at("lna").at("comp_gain_db").get<double>() == 0.0);

    write_calibration_json(file, std::vector<CalibrationRecord>{rec}, std::nullopt);
    const nlohmann::json bare = nlohmann::json::parse(slurp(file));
    CHECK(!bare.contains("residuals"));
}

/* ---- benchmark and fit outputs ---------------------------------------------- */

TEST_CASE("learning curve CSV strides long histories but keeps both endpoints") {
    TempDir dir;
    BenchmarkReport report;
    report.scenario = "unit";
    AlgorithmStats stats;
    stats.algorithm = Algorithm::Adam;
    LearningCurve curve;
    curve.seed = 3;
    for (std::size_t i = 0; i < 5003; ++i)
        curve.error_history.push_back(static_cast<double>(i));
    stats.curves.push_back(curve);
    report.algorithms.push_back(stats);

    const fs::path csv = dir.path / "curves.csv";
    write_learning_curves_csv(csv, report, 100);

    std::vector<std::string> lines;
    {
        std::istringstream is(slurp(csv));
        std::string line;
        while (std::getline(is, line))
            lines.push_back(line);
    }
    REQUIRE(lines.size() >= 3);
    CHECK(lines[0] == "algorithm,seed,epoch,E");
    CHECK(lines[1] == "adam,3,0,0");
    CHECK(lines.back() == "adam,3,5002,5002");
    CHECK(lines.size() <= 103); // ~max_rows_per_run data rows plus header and tail

    // The E column must agree with the epoch index we stored, and epochs
    // must be strictly increasing.
    long prev_epoch = -1;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream row(lines[i]);
        std::string alg, seed, epoch, value;
        std::getline(row, alg, ',');
        std::getline(row, seed, ',');
        std::getline(row, epoch, ',');
        std::getline(row, value, ',');
        CHECK(alg == "adam");
        CHECK(seed == "3");
        const long ep = std::strtol(epoch.c_str(), nullptr, 10);
        CHECK(ep > prev_epoch);
        prev_epoch = ep;
        CHECK(std::strtod(value.c_str(), nullptr) == static_cast<double>(ep));
    }

    // Short histories are emitted in full.
    report.algorithms[0].curves[0].error_history = {4.0, 2.0, 1.0};
    write_learning_curves_csv(csv, report);
    CHECK(slurp(csv) == "algorithm,seed,epoch,E\nadam,3,0,4\nadam,3,1,2\nadam,3,2,1\n");

    // max_rows_per_run = 0 behaves like 1: first epoch plus the final one.
    report.algorithms[0].curves[0].error_history = {4.0, 2.0, 1.0, 0.5, 0.25};
    write_learning_curves_csv(csv, report, 0);
    CHECK(slurp(csv) == "algorithm,seed,epoch,E\nadam,3,0,4\nadam,3,4,0.25\n");
}

TEST_CASE("benchmark JSON reports per-algorithm statistics with null placeholders") {
    TempDir dir;
    BenchmarkReport report;
    report.scenario = "abc123";
    AlgorithmStats adam;
    adam.algorithm = Algorithm::Adam;
    adam.runs = 4;
    adam.converged_runs = 4;
    adam.min_epoch = 7000;
    adam.median_epoch = 8302.0;
    adam.max_epoch = 9000;
    AlgorithmStats momentum;
    momentum.algorithm = Algorithm::MomentumGD;
    momentum.runs = 4;
    momentum.converged_runs = 0;
    momentum.diverged_runs = 1;
    report.algorithms = {adam, momentum};

    const fs::path file = dir.path / "benchmark.json";
    write_benchmark_json(file, report);
    const nlohmann::json j = nlohmann::json::parse(slurp(file));
    CHECK(j.at("scenario").get<std::string>() == "abc123");
    REQUIRE(j.at("algorithms").size() == 2);
    const auto& a = j.at("algorithms").at(0);
    CHECK(a.at("algorithm").get<std::string>() == "adam");
    CHECK(a.at("runs").get<int>() == 4);
    CHECK(a.at("converged_runs").get<int>() == 4);
    CHECK(a.at("diverged_runs").get<int>() == 0);
    CHECK(a.at("min_epoch").get<std::size_t>() == 7000);
    CHECK(a.at("median_epoch").get<double>() == 8302.0);
    CHECK(a.at("max_epoch").get<std::size_t>() == 9000);
    const auto& m = j.at("algorithms").at(1);
    CHECK(m.at("algorithm").get<std::string>() == "momentum");
    CHECK(m.at("min_epoch").is_null());
    CHECK(m.at("median_epoch").is_null());
    CHECK(m.at("max_epoch").is_null());
    CHECK(!j.contains("residuals"));

    report.residuals = ResidualSummary{};
    report.residuals->lna = {0.1, 0.2, 0.3, 0.4};
    write_benchmark_json(file, report);
    const nlohmann::json with = nlohmann::json::parse(slurp(file));
    CHECK(with.at("residuals").at("lna").at("comp_phase_deg").get<double>() == 0.4);
}

TEST_CASE("fit JSON records the outcome of a single fit") {
    TempDir dir;
    FitResult result;
    result.algorithm = Algorithm::MomentumGD;
    result.amplitude = 2.5;
    result.phase = -0.3;
    result.final_cost = 1e-9;
    result.epochs_run = 12;
    result.converged_epoch = std::nullopt;

    const fs::path file = dir.path / "fit.json";
    write_fit_json(file, result, 6e-9);
    const nlohmann::json j = nlohmann::json::parse(slurp(file));
    CHECK(j.at("algorithm").get<std::string>() == "momentum");
    CHECK(j.at("amplitude").get<double>() == 2.5);
    CHECK(j.at("phase_rad").get<double>() == -0.3);
    CHECK(j.at("final_cost").get<double>() == 1e-9);
    CHECK(j.at("epochs_run").get<std::size_t>() == 12);
    CHECK(j.at("converged_epoch").is_null());
    CHECK(j.at("group_delay_s").get<double>() == 6e-9);

    result.converged_epoch = 8;
    write_fit_json(file, result);
    const nlohmann::json again = nlohmann::json::parse(slurp(file));
    CHECK(again.at("converged_epoch").get<std::size_t>() == 8);
    CHECK(again.at("group_delay_s").is_null());
}

/* ---- run manifest ------------------------------------------------------------ */

TEST_CASE("manifest JSON round-trips and validates its keys") {
    TempDir dir;
    Manifest manifest;
    manifest.config_file = "scenario.cfg";
    manifest.config_hash = "00ff00ff00ff00ff";
    manifest.seed = 17;
    manifest.sample_rate_hz = 350e6;
    manifest.temperature_count = 51;
    manifest.pulses_per_dwell = 16;
    manifest.captures = {{"captures.bin", "bin"}, {"captures.csv", "csv"}};

    const fs::path file = dir.path / "manifest.json";
    write_manifest_json(file, manifest);
    const Manifest back = read_manifest_json(file);
    CHECK(back.config_file == manifest.config_file);
    CHECK(back.config_hash == manifest.config_hash);
    CHECK(back.seed == manifest.seed);
    CHECK(back.sample_rate_hz == manifest.sample_rate_hz);
    CHECK(back.temperature_count == manifest.temperature_count);
    CHECK(back.pulses_per_dwell == manifest.pulses_per_dwell);
    REQUIRE(back.captures.size() == 2);
    CHECK(back.captures[0].file == "captures.bin");
    CHECK(back.captures[0].format == "bin");
    CHECK(back.captures[1].file == "captures.csv");
    CHECK(back.captures[1].format == "csv");

    dump_text(file, "{\"config_file\": \"scenario.cfg\"}");
    CHECK_THROWS_AS(read_manifest_json(file), IoError); // missing keys

    dump_text(file, "not json at all");
    CHECK_THROWS_AS(read_manifest_json(file), IoError);

    CHECK_THROWS_AS(read_manifest_json(dir.path / "absent.json"), IoError);
}
