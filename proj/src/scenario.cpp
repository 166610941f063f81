#include "chirpcal/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace chirpcal {

ChirpParams ScenarioConfig::chirp_params() const {
    ChirpParams p;
    p.amplitude = amplitude;
    p.chirp_rate = bandwidth_hz / pulse_duration_s;
    p.center_frequency = center_frequency_hz;
    p.phase = wrap_phase(phase_rad);
    p.pulse_duration = pulse_duration_s;
    p.sample_rate = sample_rate_hz;
    p.pri = pri_s;
    p.convention = freq_term;
    return p;
}

NetworkModel ScenarioConfig::network_model() const {
    auto make_curve = [](const std::vector<std::pair<double, double>>& knots, bool degrees) {
        DriftCurve c;
        for (const auto& [t, v] : knots)
            c.knots.emplace_back(t, degrees ? deg_to_rad(v) : v);
        return c;
    };
    auto make_path = [](PathId id, const PathConfig& cfg) {
        PathModel p;
        p.id = id;
        p.passive_gain_db = cfg.passive_gain_db;
        p.passive_phase = cfg.passive_phase_rad;
        p.group_delay = cfg.group_delay_s;
        return p;
    };

    NetworkModel m;
    m.p1 = make_path(PathId::P1, p1);
    m.p2 = make_path(PathId::P2, p2);
    m.p3 = make_path(PathId::P3, p3);
    m.p1.amplifier = AmplifierModel{Element::HPA, hpa.reference_gain_db,
                                    hpa.reference_phase_rad,
                                    make_curve(hpa.gain_drift_db, false),
                                    make_curve(hpa.phase_drift_deg, true)};
    m.p2.amplifier = AmplifierModel{Element::LNA, lna.reference_gain_db,
                                    lna.reference_phase_rad,
                                    make_curve(lna.gain_drift_db, false),
                                    make_curve(lna.phase_drift_deg, true)};
    m.snr_db = snr_db;
    m.temperature_step = temperature_step_c;
    m.t_min = t_min_c;
    m.t_max = t_max_c;
    m.seed = seed;
    return m;
}

CalibrationOptions ScenarioConfig::calibration_options() const {
    CalibrationOptions opt;
    opt.offsets_mode = offsets_mode;
    opt.hpa_nominal_gain_db = hpa_nominal_gain_db;
    opt.hpa_nominal_phase = hpa_nominal_phase_rad;
    opt.lna_nominal_gain_db = lna_nominal_gain_db;
    opt.lna_nominal_phase = lna_nominal_phase_rad;
    if (offsets_mode == OffsetsMode::External) {
        opt.external_offsets[PathId::P1] = p1_offset;
        opt.external_offsets[PathId::P2] = p2_offset;
    }
    return opt;
}

LearningSpeedScenario ScenarioConfig::bench_scenario() const {
    LearningSpeedScenario s;
    s.generator = chirp_params();
    s.true_gain_db = bench_gain_db;
    s.true_phase = bench_phase_rad;
    s.snr_db = bench_snr_db;
    s.base_config = optimizer;
    s.label = scenario_hash(*this);
    return s;
}

void ScenarioConfig::validate() const {
    chirp_params().validate();
    optimizer.validate();
    network_model().validate(t_ref_c, pri_s);
    if (pulses_per_dwell == 0)
        throw ConfigError("sweep: pulses_per_dwell must be > 0");
    if (bench_seeds == 0)
        throw ConfigError("benchmark: seeds must be > 0");
    if (!(gate_gain_db > 0.0) || !(gate_phase_deg > 0.0))
        throw ConfigError("calibration: gate thresholds must be > 0");
    for (const std::string& f : formats)
        if (f != "csv" && f != "json" && f != "bin")
            throw ConfigError("output: unknown format '" + f + "'");
    if (formats.empty())
        throw ConfigError("output: at least one format required");
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_knots(const std::vector<std::pair<double, double>>& knots) {
    std::string out;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (i)
            out += ", ";
        out += fmt_double(knots[i].first) + ":" + fmt_double(knots[i].second);
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, std::size_t line) {
    const std::string t = trim(v);
    char* end = nullptr;
    const double d = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(d))
        throw ConfigError("expected a finite number, got '" + t + "'", line);
    return d;
}

std::uint64_t parse_uint(const std::string& v, std::size_t line) {
    const std::string t = trim(v);
    char* end = nullptr;
    const std::uint64_t u = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        throw ConfigError("expected a non-negative integer, got '" + t + "'", line);
    return u;
}

std::optional<double> parse_optional_db(const std::string& v, std::size_t line) {
    if (trim(v) == "off")
        return std::nullopt;
    return parse_double(v, line);
}

std::vector<std::pair<double, double>> parse_knots(const std::string& v, std::size_t line) {
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("knot entries must look like 'temperature:value'", line);
        knots.emplace_back(parse_double(item.substr(0, colon), line),
                           parse_double(item.substr(colon + 1), line));
    }
    if (knots.size() < 2)
        throw ConfigError("need at least 2 drift knots", line);
    return knots;
}

std::vector<std::string> parse_list(const std::string& v) {
    std::vector<std::string> items;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        items.push_back(trim(item));
    return items;
}

} // namespace

std::string serialize_scenario(const ScenarioConfig& c) {
    std::ostringstream os;
    os << "[chirp]\n";
    os << "amplitude = " << fmt_double(c.amplitude) << "\n";
    os << "bandwidth_hz = " << fmt_double(c.bandwidth_hz) << "\n";
    os << "center_frequency_hz = " << fmt_double(c.center_frequency_hz) << "\n";
    os << "phase_rad = " << fmt_double(c.phase_rad) << "\n";
    os << "pulse_duration_s = " << fmt_double(c.pulse_duration_s) << "\n";
    os << "sample_rate_hz = " << fmt_double(c.sample_rate_hz) << "\n";
    os << "pri_s = " << fmt_double(c.pri_s) << "\n";
    os << "freq_term = "
       << (c.freq_term == FreqTermConvention::TwoPi ? "two_pi" : "paper_pi") << "\n";
    os << "\n[network]\n";
    os << "snr_db = " << (c.snr_db ? fmt_double(*c.snr_db) : "off") << "\n";
    os << "temperature_step_c = " << fmt_double(c.temperature_step_c) << "\n";
    os << "t_min_c = " << fmt_double(c.t_min_c) << "\n";
    os << "t_max_c = " << fmt_double(c.t_max_c) << "\n";
    os << "seed = " << c.seed << "\n";
    const std::pair<const char*, const ScenarioConfig::PathConfig*> paths[] = {
        {"p1", &c.p1}, {"p2", &c.p2}, {"p3", &c.p3}};
    for (const auto& [name, p] : paths) {
        os << "\n[network." << name << "]\n";
        os << "passive_gain_db = " << fmt_double(p->passive_gain_db) << "\n";
        os << "passive_phase_rad = " << fmt_double(p->passive_phase_rad) << "\n";
        os << "group_delay_s = " << fmt_double(p->group_delay_s) << "\n";
    }
    const std::pair<const char*, const ScenarioConfig::AmplifierConfig*> amps[] = {
        {"hpa", &c.hpa}, {"lna", &c.lna}};
    for (const auto& [name, a] : amps) {
        os << "\n[network." << name << "]\n";
        os << "reference_gain_db = " << fmt_double(a->reference_gain_db) << "\n";
        os << "reference_phase_rad = " << fmt_double(a->reference_phase_rad) << "\n";
        os << "gain_drift_db = " << fmt_knots(a->gain_drift_db) << "\n";
        os << "phase_drift_deg = " << fmt_knots(a->phase_drift_deg) << "\n";
    }
    os << "\n[sweep]\n";
    os << "t_ref_c = " << fmt_double(c.t_ref_c) << "\n";
    os << "pulses_per_dwell = " << c.pulses_per_dwell << "\n";
    os << "\n[optimizer]\n";
    os << "algorithm = " << (c.optimizer.algorithm == Algorithm::Adam ? "adam" : "momentum")
       << "\n";
    os << "stepsize = " << fmt_double(c.optimizer.stepsize) << "\n";
    os << "beta1 = " << fmt_double(c.optimizer.beta1) << "\n";
    os << "beta2 = " << fmt_double(c.optimizer.beta2) << "\n";
    os << "epsilon = " << fmt_double(c.optimizer.epsilon) << "\n";
    os << "momentum = " << fmt_double(c.optimizer.momentum) << "\n";
    os << "max_epochs = " << c.optimizer.max_epochs << "\n";
    os << "convergence_ratio = " << fmt_double(c.optimizer.convergence_ratio) << "\n";
    os << "bias_correction = "
       << (c.optimizer.bias_correction == BiasCorrectionMode::Standard ? "standard" : "paper")
       << "\n";
    os << "\n[calibration]\n";
    const char* mode = "characterize";
    if (c.offsets_mode == OffsetsMode::Zero)
        mode = "zero";
    else if (c.offsets_mode == OffsetsMode::External)
        mode = "external";
    os << "offsets_mode = " << mode << "\n";
    os << "hpa_nominal_gain_db = " << fmt_double(c.hpa_nominal_gain_db) << "\n";
    os << "hpa_nominal_phase_rad = " << fmt_double(c.hpa_nominal_phase_rad) << "\n";
    os << "lna_nominal_gain_db = " << fmt_double(c.lna_nominal_gain_db) << "\n";
    os << "lna_nominal_phase_rad = " << fmt_double(c.lna_nominal_phase_rad) << "\n";
    os << "p1_offset_gain_db = " << fmt_double(c.p1_offset.gain_db) << "\n";
    os << "p1_offset_phase_rad = " << fmt_double(c.p1_offset.phase) << "\n";
    os << "p2_offset_gain_db = " << fmt_double(c.p2_offset.gain_db) << "\n";
    os << "p2_offset_phase_rad = " << fmt_double(c.p2_offset.phase) << "\n";
    os << "gate_gain_db = " << fmt_double(c.gate_gain_db) << "\n";
    os << "gate_phase_deg = " << fmt_double(c.gate_phase_deg) << "\n";
    os << "\n[benchmark]\n";
    os << "gain_db = " << fmt_double(c.bench_gain_db) << "\n";
    os << "phase_rad = " << fmt_double(c.bench_phase_rad) << "\n";
    os << "snr_db = " << (c.bench_snr_db ? fmt_double(*c.bench_snr_db) : "off") << "\n";
    os << "seeds = " << c.bench_seeds << "\n";
    os << "\n[output]\n";
    os << "directory = " << c.out_directory << "\n";
    std::string fmts;
    for (std::size_t i = 0; i < c.formats.size(); ++i)
        fmts += (i ? "," : "") + c.formats[i];
    os << "formats = " << fmts << "\n";
    return os.str();
}

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig c;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;

    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line = trim(line.substr(0, hash));
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("unterminated section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            static const char* known[] = {"chirp",      "network",     "network.p1",
                                          "network.p2", "network.p3",  "network.hpa",
                                          "network.lna", "sweep",      "optimizer",
                                          "calibration", "benchmark",  "output"};
            if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
                    return section == k;
                }) == std::end(known))
                throw ConfigError("unknown section [" + section + "]", line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("empty key", line_no);

        auto unknown = [&]() -> ConfigError {
            return ConfigError("unknown key '" + key + "' in section [" + section + "]",
                               line_no);
        };

        if (section == "chirp") {
            if (key == "amplitude") c.amplitude = parse_double(value, line_no);
            else if (key == "bandwidth_hz") c.bandwidth_hz = parse_double(value, line_no);
            else if (key == "center_frequency_hz")
                c.center_frequency_hz = parse_double(value, line_no);
            else if (key == "phase_rad") c.phase_rad = parse_double(value, line_no);
            else if (key == "pulse_duration_s")
                c.pulse_duration_s = parse_double(value, line_no);
            else if (key == "sample_rate_hz") c.sample_rate_hz = parse_double(value, line_no);
            else if (key == "pri_s") c.pri_s = parse_double(value, line_no);
            else if (key == "freq_term") {
                if (value == "two_pi") c.freq_term = FreqTermConvention::TwoPi;
                else if (value == "paper_pi") c.freq_term = FreqTermConvention::PaperPi;
                else throw ConfigError("freq_term must be two_pi or paper_pi", line_no);
            } else throw unknown();
        } else if (section == "network") {
            if (key == "snr_db") c.snr_db = parse_optional_db(value, line_no);
            else if (key == "temperature_step_c")
                c.temperature_step_c = parse_double(value, line_no);
            else if (key == "t_min_c") c.t_min_c = parse_double(value, line_no);
            else if (key == "t_max_c") c.t_max_c = parse_double(value, line_no);
            else if (key == "seed") c.seed = parse_uint(value, line_no);
            else throw unknown();
        } else if (section == "network.p1" || section == "network.p2" ||
                   section == "network.p3") {
            ScenarioConfig::PathConfig& p = (section == "network.p1")   ? c.p1
                                            : (section == "network.p2") ? c.p2
                                                                        : c.p3;
            if (key == "passive_gain_db") p.passive_gain_db = parse_double(value, line_no);
            else if (key == "passive_phase_rad")
                p.passive_phase_rad = parse_double(value, line_no);
            else if (key == "group_delay_s") p.group_delay_s = parse_double(value, line_no);
            else throw unknown();
        } else if (section == "network.hpa" || section == "network.lna") {
            ScenarioConfig::AmplifierConfig& a = (section == "network.hpa") ? c.hpa : c.lna;
            if (key == "reference_gain_db")
                a.reference_gain_db = parse_double(value, line_no);
            else if (key == "reference_phase_rad")
                a.reference_phase_rad = parse_double(value, line_no);
            else if (key == "gain_drift_db") a.gain_drift_db = parse_knots(value, line_no);
            else if (key == "phase_drift_deg")
                a.phase_drift_deg = parse_knots(value, line_no);
            else throw unknown();
        } else if (section == "sweep") {
            if (key == "t_ref_c") c.t_ref_c = parse_double(value, line_no);
            else if (key == "pulses_per_dwell")
                c.pulses_per_dwell = static_cast<std::size_t>(parse_uint(value, line_no));
            else throw unknown();
        } else if (section == "optimizer") {
            if (key == "algorithm") {
                if (value == "adam") c.optimizer.algorithm = Algorithm::Adam;
                else if (value == "momentum") c.optimizer.algorithm = Algorithm::MomentumGD;
                else throw ConfigError("algorithm must be adam or momentum", line_no);
            } else if (key == "stepsize") c.optimizer.stepsize = parse_double(value, line_no);
            else if (key == "beta1") c.optimizer.beta1 = parse_double(value, line_no);
            else if (key == "beta2") c.optimizer.beta2 = parse_double(value, line_no);
            else if (key == "epsilon") c.optimizer.epsilon = parse_double(value, line_no);
            else if (key == "momentum") c.optimizer.momentum = parse_double(value, line_no);
            else if (key == "max_epochs")
                c.optimizer.max_epochs = static_cast<std::size_t>(parse_uint(value, line_no));
            else if (key == "convergence_ratio")
                c.optimizer.convergence_ratio = parse_double(value, line_no);
            else if (key == "bias_correction") {
                if (value == "standard")
                    c.optimizer.bias_correction = BiasCorrectionMode::Standard;
                else if (value == "paper")
                    c.optimizer.bias_correction = BiasCorrectionMode::PaperLiteral;
                else throw ConfigError("bias_correction must be standard or paper", line_no);
            } else throw unknown();
        } else if (section == "calibration") {
            if (key == "offsets_mode") {
                if (value == "zero") c.offsets_mode = OffsetsMode::Zero;
                else if (value == "characterize")
                    c.offsets_mode = OffsetsMode::CharacterizeAtTref;
                else if (value == "external") c.offsets_mode = OffsetsMode::External;
                else throw ConfigError("offsets_mode must be zero, characterize or external",
                                       line_no);
            } else if (key == "hpa_nominal_gain_db")
                c.hpa_nominal_gain_db = parse_double(value, line_no);
            else if (key == "hpa_nominal_phase_rad")
                c.hpa_nominal_phase_rad = parse_double(value, line_no);
            else if (key == "lna_nominal_gain_db")
                c.lna_nominal_gain_db = parse_double(value, line_no);
            else if (key == "lna_nominal_phase_rad")
                c.lna_nominal_phase_rad = parse_double(value, line_no);
            else if (key == "p1_offset_gain_db")
                c.p1_offset.gain_db = parse_double(value, line_no);
            else if (key == "p1_offset_phase_rad")
                c.p1_offset.phase = parse_double(value, line_no);
            else if (key == "p2_offset_gain_db")
                c.p2_offset.gain_db = parse_double(value, line_no);
            else if (key == "p2_offset_phase_rad")
                c.p2_offset.phase = parse_double(value, line_no);
            else if (key == "gate_gain_db")
                c.gate_gain_db = parse_double(value, line_no);
            else if (key == "gate_phase_deg")
                c.gate_phase_deg = parse_double(value, line_no);
            else throw unknown();
        } else if (section == "benchmark") {
            if (key == "gain_db") c.bench_gain_db = parse_double(value, line_no);
            else if (key == "phase_rad") c.bench_phase_rad = parse_double(value, line_no);
            else if (key == "snr_db") c.bench_snr_db = parse_optional_db(value, line_no);
            else if (key == "seeds")
                c.bench_seeds = static_cast<std::size_t>(parse_uint(value, line_no));
            else throw unknown();
        } else if (section == "output") {
            if (key == "directory") c.out_directory = value;
            else if (key == "formats") c.formats = parse_list(value);
            else throw unknown();
        } else {
            throw ConfigError("key outside any section", line_no);
        }
    }
    c.validate();
    return c;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what(), 0);
    }
}

std::string scenario_hash(const ScenarioConfig& config) {
    const std::string canonical = serialize_scenario(config);
    std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

} // namespace chirpcal
