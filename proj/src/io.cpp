#include "chirpcal/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace chirpcal {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

void write_file(const fs::path& file, const std::string& data) {
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw IoError("cannot open for writing: " + file.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out)
        throw IoError("write failed: " + file.string());
}

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw IoError("cannot open: " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw IoError("read failed: " + file.string());
    return ss.str();
}

[[noreturn]] void fail_at(const fs::path& file, std::size_t line, const std::string& msg) {
    throw IoError(file.string() + ":" + std::to_string(line) + ": " + msg);
}

/* Raw lines with their 1-based numbers, trailing \r stripped, blanks dropped. */
std::vector<std::pair<std::size_t, std::string>> read_csv_lines(const fs::path& file) {
    const std::string text = read_file(file);
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::size_t start = 0, number = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos)
            end = text.size();
        ++number;
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            lines.emplace_back(number, line);
        start = end + 1;
        if (end == text.size())
            break;
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_f64(const std::string& s, const fs::path& file, std::size_t line) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        fail_at(file, line, "not a number: '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s, const fs::path& file, std::size_t line) {
    if (s.empty() || s[0] == '-' || s[0] == '+')
        fail_at(file, line, "not a non-negative integer: '" + s + "'");
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE)
        fail_at(file, line, "not a non-negative integer: '" + s + "'");
    return v;
}

std::vector<std::string> expect_fields(const std::pair<std::size_t, std::string>& row,
                                       std::size_t count, const fs::path& file) {
    std::vector<std::string> fields = split_fields(row.second);
    if (fields.size() != count)
        fail_at(file, row.first,
                "expected " + std::to_string(count) + " fields, got " +
                    std::to_string(fields.size()));
    return fields;
}

void expect_header(const std::vector<std::pair<std::size_t, std::string>>& lines,
                   const std::string& header, const fs::path& file) {
    if (lines.empty())
        throw IoError(file.string() + ": empty file");
    if (lines.front().second != header)
        fail_at(file, lines.front().first, "expected header '" + header + "'");
}

/* ---- little-endian byte packing ---------------------------------------- */

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double d) {
    std::uint64_t v = 0;
    static_assert(sizeof d == sizeof v);
    std::memcpy(&v, &d, sizeof v);
    put_u64(out, v);
}

class ByteReader {
  public:
    ByteReader(const std::string& buf, fs::path file) : buf_(buf), file_(std::move(file)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf_[pos_++]);
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i]))
                 << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() {
        const std::uint64_t v = u64();
        double d = 0.0;
        std::memcpy(&d, &v, sizeof d);
        return d;
    }
    std::size_t remaining() const { return buf_.size() - pos_; }
    const fs::path& file() const { return file_; }

  private:
    void need(std::size_t n) {
        if (buf_.size() - pos_ < n)
            throw IoError(file_.string() + ": truncated capture file");
    }
    const std::string& buf_;
    fs::path file_;
    std::size_t pos_ = 0;
};

constexpr char kCaptureMagic[8] = {'C', 'C', 'A', 'P', '0', '0', '0', '1'};

std::uint8_t path_tag(PathId id) {
    switch (id) {
    case PathId::P1: return 0;
    case PathId::P2: return 1;
    case PathId::P3: return 2;
    }
    throw IoError("invalid path id");
}

PathId path_from_tag(std::uint8_t tag, const fs::path& file) {
    switch (tag) {
    case 0: return PathId::P1;
    case 1: return PathId::P2;
    case 2: return PathId::P3;
    default: throw IoError(file.string() + ": invalid path tag " + std::to_string(tag));
    }
}

/* Appends a record to the sweep, starting a new set whenever the temperature
 * changes from the previous record. */
void append_grouped(std::vector<CaptureSet>& sets, CaptureRecord&& rec) {
    if (sets.empty() || sets.back().temperature != rec.temperature)
        sets.push_back(CaptureSet{rec.temperature, {}});
    sets.back().captures.push_back(std::move(rec));
}

template <typename T> ordered_json json_or_null(const std::optional<T>& v) {
    if (v)
        return ordered_json(*v);
    return ordered_json(nullptr);
}

ordered_json residuals_json(const ResidualSummary& summary) {
    auto element = [](const ElementResiduals& r) {
        ordered_json j;
        j["uncomp_gain_db"] = r.uncomp_gain_db;
        j["uncomp_phase_deg"] = r.uncomp_phase_deg;
        j["comp_gain_db"] = r.comp_gain_db;
        j["comp_phase_deg"] = r.comp_phase_deg;
        return j;
    };
    ordered_json j;
    j["hpa"] = element(summary.hpa);
    j["lna"] = element(summary.lna);
    return j;
}

void write_json_file(const fs::path& file, const ordered_json& j) {
    write_file(file, j.dump(2) + "\n");
}

ordered_json parse_json_file(const fs::path& file) {
    const std::string text = read_file(file);
    try {
        return ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw IoError(file.string() + ": " + e.what());
    }
}

} // namespace

/* ---- waveforms ----------------------------------------------------------- */

void write_signal_csv(const fs::path& file, const SampledSignal& signal) {
    std::string out = "index,t_seconds,i,q\n";
    out.reserve(out.size() + signal.size() * 64);
    for (std::size_t i = 0; i < signal.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(signal.time_at(i));
        out += ',';
        out += format_double(signal.samples[i].real());
        out += ',';
        out += format_double(signal.samples[i].imag());
        out += '\n';
    }
    write_file(file, out);
}

SampledSignal read_signal_csv(const fs::path& file, std::optional<double> sample_rate_hint) {
    const auto lines = read_csv_lines(file);
    expect_header(lines, "index,t_seconds,i,q", file);

    std::vector<double> times;
    SampledSignal signal;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = expect_fields(lines[r], 4, file);
        const std::uint64_t index = parse_u64(fields[0], file, lines[r].first);
        if (index != signal.samples.size())
            fail_at(file, lines[r].first, "sample index out of order");
        times.push_back(parse_f64(fields[1], file, lines[r].first));
        signal.samples.emplace_back(parse_f64(fields[2], file, lines[r].first),
                                    parse_f64(fields[3], file, lines[r].first));
    }
    if (signal.samples.size() < 2)
        throw IoError(file.string() + ": need at least two samples to recover the sample rate");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw IoError(file.string() + ": time column must be strictly increasing");

    double rate = 1.0 / (times[1] - times[0]);
    if (sample_rate_hint && std::fabs(rate - *sample_rate_hint) <= 1e-6 * *sample_rate_hint)
        rate = *sample_rate_hint;
    signal.sample_rate = rate;
    signal.start_time = times[0];
    return signal;
}

void write_history_csv(const fs::path& file, std::span<const double> history) {
    std::string out = "epoch,E\n";
    out.reserve(out.size() + history.size() * 32);
    for (std::size_t i = 0; i < history.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(history[i]);
        out += '\n';
    }
    write_file(file, out);
}

std::vector<double> read_history_csv(const fs::path& file) {
    const auto lines = read_csv_lines(file);
    expect_header(lines, "epoch,E", file);
    std::vector<double> history;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = expect_fields(lines[r], 2, file);
        if (parse_u64(fields[0], file, lines[r].first) != history.size())
            fail_at(file, lines[r].first, "epoch out of order");
        history.push_back(parse_f64(fields[1], file, lines[r].first));
    }
    return history;
}

/* ---- capture sweeps ------------------------------------------------------ */

void write_captures_csv(const fs::path& file, std::span<const CaptureSet> sweep) {
    std::string out = "temperature,path,pulse_index,sample_index,i,q\n";
    std::size_t rows = 0;
    for (const CaptureSet& set : sweep)
        for (const CaptureRecord& rec : set.captures)
            rows += rec.pulse.size();
    out.reserve(out.size() + rows * 64);

    for (const CaptureSet& set : sweep) {
        for (const CaptureRecord& rec : set.captures) {
            const std::string prefix = format_double(rec.temperature) + "," +
                                       to_string(rec.path) + "," +
                                       std::to_string(rec.pulse_index) + ",";
            for (std::size_t i = 0; i < rec.pulse.size(); ++i) {
                out += prefix;
                out += std::to_string(i);
                out += ',';
                out += format_double(rec.pulse.samples[i].real());
                out += ',';
                out += format_double(rec.pulse.samples[i].imag());
                out += '\n';
            }
        }
    }
    write_file(file, out);
}

std::vector<CaptureSet> read_captures_csv(const fs::path& file, double sample_rate) {
    if (!(sample_rate > 0.0))
        throw IoError("read_captures_csv: sample rate must be positive");
    const auto lines = read_csv_lines(file);
    expect_header(lines, "temperature,path,pulse_index,sample_index,i,q", file);

    std::vector<CaptureSet> sets;
    CaptureRecord cur;
    bool have_current = false;
    auto flush = [&]() {
        if (have_current)
            append_grouped(sets, std::move(cur));
        cur = CaptureRecord{};
        have_current = false;
    };

    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::size_t ln = lines[r].first;
        const auto fields = expect_fields(lines[r], 6, file);
        const double temperature = parse_f64(fields[0], file, ln);
        PathId path = PathId::P3;
        try {
            path = path_from_string(fields[1]);
        } catch (const std::exception& e) {
            fail_at(file, ln, e.what());
        }
        const std::uint64_t pulse_index = parse_u64(fields[2], file, ln);
        const std::uint64_t sample_index = parse_u64(fields[3], file, ln);
        const double re = parse_f64(fields[4], file, ln);
        const double im = parse_f64(fields[5], file, ln);

        const bool same = have_current && cur.temperature == temperature &&
                          cur.path == path && cur.pulse_index == pulse_index;
        if (!same) {
            flush();
            cur.temperature = temperature;
            cur.path = path;
            cur.pulse_index = static_cast<std::size_t>(pulse_index);
            cur.pulse = SampledSignal{{}, sample_rate, 0.0};
            have_current = true;
        }
        if (sample_index != cur.pulse.samples.size())
            fail_at(file, ln, "sample_index out of order");
        cur.pulse.samples.emplace_back(re, im);
    }
    flush();
    if (sets.empty())
        throw IoError(file.string() + ": no capture rows");
    return sets;
}

void write_captures_bin(const fs::path& file, std::span<const CaptureSet> sweep) {
    std::string out(kCaptureMagic, sizeof kCaptureMagic);
    std::uint64_t count = 0;
    for (const CaptureSet& set : sweep)
        count += set.captures.size();
    put_u64(out, count);

    for (const CaptureSet& set : sweep) {
        for (const CaptureRecord& rec : set.captures) {
            put_f64(out, rec.temperature);
            put_u8(out, path_tag(rec.path));
            put_u64(out, rec.pulse_index);
            put_u64(out, rec.pulse.size());
            put_f64(out, rec.pulse.sample_rate);
            put_f64(out, rec.pulse.start_time);
            for (const cplx& s : rec.pulse.samples) {
                put_f64(out, s.real());
                put_f64(out, s.imag());
            }
        }
    }
    write_file(file, out);
}

std::vector<CaptureSet> read_captures_bin(const fs::path& file) {
    const std::string buf = read_file(file);
    if (buf.size() < sizeof kCaptureMagic ||
        std::memcmp(buf.data(), kCaptureMagic, sizeof kCaptureMagic) != 0)
        throw IoError(file.string() + ": not a capture file (bad magic)");
    ByteReader reader(buf, file);
    for (std::size_t i = 0; i < sizeof kCaptureMagic; ++i)
        reader.u8();

    const std::uint64_t count = reader.u64();
    std::vector<CaptureSet> sets;
    for (std::uint64_t n = 0; n < count; ++n) {
        CaptureRecord rec;
        rec.temperature = reader.f64();
        rec.path = path_from_tag(reader.u8(), file);
        rec.pulse_index = static_cast<std::size_t>(reader.u64());
        const std::uint64_t samples = reader.u64();
        rec.pulse.sample_rate = reader.f64();
        if (!(rec.pulse.sample_rate > 0.0))
            throw IoError(file.string() + ": capture has non-positive sample rate");
        rec.pulse.start_time = reader.f64();
        if (samples > reader.remaining() / 16)
            throw IoError(file.string() + ": truncated capture file");
        rec.pulse.samples.reserve(static_cast<std::size_t>(samples));
        for (std::uint64_t i = 0; i < samples; ++i) {
            const double re = reader.f64();
            const double im = reader.f64();
            rec.pulse.samples.emplace_back(re, im);
        }
        append_grouped(sets, std::move(rec));
    }
    if (reader.remaining() != 0)
        throw IoError(file.string() + ": trailing bytes after last capture");
    if (sets.empty())
        throw IoError(file.string() + ": no capture records");
    return sets;
}

void write_captures_json(const fs::path& file, std::span<const CaptureSet> sweep) {
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["captures"] = ordered_json::array();
    for (const CaptureSet& set : sweep) {
        for (const CaptureRecord& rec : set.captures) {
            ordered_json r;
            r["temperature_c"] = rec.temperature;
            r["path"] = to_string(rec.path);
            r["pulse_index"] = rec.pulse_index;
            r["sample_rate_hz"] = rec.pulse.sample_rate;
            r["start_time_s"] = rec.pulse.start_time;
            ordered_json re = ordered_json::array();
            ordered_json im = ordered_json::array();
            for (const cplx& s : rec.pulse.samples) {
                re.push_back(s.real());
                im.push_back(s.imag());
            }
            r["i"] = std::move(re);
            r["q"] = std::move(im);
            j["captures"].push_back(std::move(r));
        }
    }
    write_json_file(file, j);
}

std::vector<CaptureSet> read_captures_json(const fs::path& file) {
    const ordered_json j = parse_json_file(file);
    std::vector<CaptureSet> sets;
    try {
        for (const auto& r : j.at("captures")) {
            CaptureRecord rec;
            rec.temperature = r.at("temperature_c").get<double>();
            rec.path = path_from_string(r.at("path").get<std::string>());
            rec.pulse_index = r.at("pulse_index").get<std::size_t>();
            rec.pulse.sample_rate = r.at("sample_rate_hz").get<double>();
            rec.pulse.start_time = r.at("start_time_s").get<double>();
            const auto& re = r.at("i");
            const auto& im = r.at("q");
            if (re.size() != im.size())
                throw IoError(file.string() + ": i/q arrays differ in length");
            rec.pulse.samples.reserve(re.size());
            for (std::size_t i = 0; i < re.size(); ++i)
                rec.pulse.samples.emplace_back(re[i].get<double>(), im[i].get<double>());
            append_grouped(sets, std::move(rec));
        }
    } catch (const ordered_json::exception& e) {
        throw IoError(file.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(file.string() + ": " + e.what());
    }
    if (sets.empty())
        throw IoError(file.string() + ": no capture records");
    return sets;
}

/* ---- calibration tables -------------------------------------------------- */

void write_calibration_csv(const fs::path& file, std::span<const CalibrationRecord> records) {
    std::string out =
        "element,temperature_C,G_meas_dB,phi_meas_deg,k_dB,theta_deg,G_comp_dB,phi_comp_deg\n";
    for (const CalibrationRecord& rec : records) {
        out += to_string(rec.element);
        out += ',';
        out += format_double(rec.temperature);
        out += ',';
        out += format_double(rec.gain_db);
        out += ',';
        out += format_double(rad_to_deg(rec.phase));
        out += ',';
        out += format_double(rec.k_db);
        out += ',';
        out += format_double(rad_to_deg(rec.theta));
        out += ',';
        out += format_double(rec.comp_gain_db);
        out += ',';
        out += format_double(rad_to_deg(rec.comp_phase));
        out += '\n';
    }
    write_file(file, out);
}

std::vector<CalibrationRecord> read_calibration_csv(const fs::path& file) {
    const auto lines = read_csv_lines(file);
    expect_header(
        lines, "element,temperature_C,G_meas_dB,phi_meas_deg,k_dB,theta_deg,G_comp_dB,phi_comp_deg",
        file);
    std::vector<CalibrationRecord> records;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::size_t ln = lines[r].first;
        const auto fields = expect_fields(lines[r], 8, file);
        CalibrationRecord rec;
        try {
            rec.element = element_from_string(fields[0]);
        } catch (const std::exception& e) {
            fail_at(file, ln, e.what());
        }
        rec.temperature = parse_f64(fields[1], file, ln);
        rec.gain_db = parse_f64(fields[2], file, ln);
        rec.phase = deg_to_rad(parse_f64(fields[3], file, ln));
        rec.k_db = parse_f64(fields[4], file, ln);
        rec.theta = deg_to_rad(parse_f64(fields[5], file, ln));
        rec.comp_gain_db = parse_f64(fields[6], file, ln);
        rec.comp_phase = deg_to_rad(parse_f64(fields[7], file, ln));
        rec.k_linear = db_to_linear(rec.k_db);
        rec.ref_gain_db = rec.gain_db + rec.k_db;
        rec.ref_phase = wrap_phase(rec.phase + rec.theta);
        records.push_back(rec);
    }
    return records;
}

void write_calibration_json(const fs::path& file, std::span<const CalibrationRecord> records,
                            const std::optional<ResidualSummary>& residuals) {
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["records"] = ordered_json::array();
    for (const CalibrationRecord& rec : records) {
        ordered_json r;
        r["element"] = to_string(rec.element);
        r["temperature_c"] = rec.temperature;
        r["gain_db"] = rec.gain_db;
        r["phase_rad"] = rec.phase;
        r["ref_gain_db"] = rec.ref_gain_db;
        r["ref_phase_rad"] = rec.ref_phase;
        r["k_db"] = rec.k_db;
        r["k_linear"] = rec.k_linear;
        r["theta_rad"] = rec.theta;
        r["comp_gain_db"] = rec.comp_gain_db;
        r["comp_phase_rad"] = rec.comp_phase;
        j["records"].push_back(std::move(r));
    }
    if (residuals)
        j["residuals"] = residuals_json(*residuals);
    write_json_file(file, j);
}

void write_residual_summary_csv(const fs::path& file, const ResidualSummary& summary) {
    std::string out = "element,uncomp_gain_db,uncomp_phase_deg,comp_gain_db,comp_phase_deg\n";
    auto row = [&](const char* name, const ElementResiduals& r) {
        out += name;
        out += ',';
        out += format_double(r.uncomp_gain_db);
        out += ',';
        out += format_double(r.uncomp_phase_deg);
        out += ',';
        out += format_double(r.comp_gain_db);
        out += ',';
        out += format_double(r.comp_phase_deg);
        out += '\n';
    };
    row("HPA", summary.hpa);
    row("LNA", summary.lna);
    write_file(file, out);
}

/* ---- optimizer benchmarks ------------------------------------------------ */

void write_learning_curves_csv(const fs::path& file, const BenchmarkReport& report,
                               std::size_t max_rows_per_run) {
    if (max_rows_per_run == 0)
        max_rows_per_run = 1;
    std::string out = "algorithm,seed,epoch,E\n";
    for (const AlgorithmStats& stats : report.algorithms) {
        const std::string name = to_string(stats.algorithm);
        for (const LearningCurve& curve : stats.curves) {
            const std::size_t n = curve.error_history.size();
            if (n == 0)
                continue;
            const std::size_t stride =
                (n <= max_rows_per_run) ? 1 : (n + max_rows_per_run - 1) / max_rows_per_run;
            const std::string prefix = name + "," + std::to_string(curve.seed) + ",";
            for (std::size_t i = 0; i < n; i += stride) {
                out += prefix;
                out += std::to_string(i);
                out += ',';
                out += format_double(curve.error_history[i]);
                out += '\n';
            }
            if ((n - 1) % stride != 0) {
                out += prefix;
                out += std::to_string(n - 1);
                out += ',';
                out += format_double(curve.error_history[n - 1]);
                out += '\n';
            }
        }
    }
    write_file(file, out);
}

void write_benchmark_json(const fs::path& file, const BenchmarkReport& report) {
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["scenario"] = report.scenario;
    j["algorithms"] = ordered_json::array();
    for (const AlgorithmStats& stats : report.algorithms) {
        ordered_json a;
        a["algorithm"] = to_string(stats.algorithm);
        a["runs"] = stats.runs;
        a["converged_runs"] = stats.converged_runs;
        a["diverged_runs"] = stats.diverged_runs;
        a["min_epoch"] = json_or_null(stats.min_epoch);
        a["median_epoch"] = json_or_null(stats.median_epoch);
        a["max_epoch"] = json_or_null(stats.max_epoch);
        j["algorithms"].push_back(std::move(a));
    }
    if (report.residuals)
        j["residuals"] = residuals_json(*report.residuals);
    write_json_file(file, j);
}

void write_fit_json(const fs::path& file, const FitResult& result,
                    std::optional<double> group_delay_s) {
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["algorithm"] = to_string(result.algorithm);
    j["amplitude"] = result.amplitude;
    j["phase_rad"] = result.phase;
    j["final_cost"] = result.final_cost;
    j["epochs_run"] = result.epochs_run;
    j["converged_epoch"] = json_or_null(result.converged_epoch);
    j["group_delay_s"] = json_or_null(group_delay_s);
    write_json_file(file, j);
}

/* ---- run manifest -------------------------------------------------------- */

void write_manifest_json(const fs::path& file, const Manifest& manifest) {
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["config_file"] = manifest.config_file;
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["sample_rate_hz"] = manifest.sample_rate_hz;
    j["temperature_count"] = manifest.temperature_count;
    j["pulses_per_dwell"] = manifest.pulses_per_dwell;
    j["captures"] = ordered_json::array();
    for (const CaptureFileEntry& entry : manifest.captures) {
        ordered_json e;
        e["file"] = entry.file;
        e["format"] = entry.format;
        j["captures"].push_back(std::move(e));
    }
    write_json_file(file, j);
}

Manifest read_manifest_json(const fs::path& file) {
    const ordered_json j = parse_json_file(file);
    Manifest manifest;
    try {
        manifest.config_file = j.at("config_file").get<std::string>();
        manifest.config_hash = j.at("config_hash").get<std::string>();
        manifest.seed = j.at("seed").get<std::uint64_t>();
        manifest.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        manifest.temperature_count = j.at("temperature_count").get<std::size_t>();
        manifest.pulses_per_dwell = j.at("pulses_per_dwell").get<std::size_t>();
        for (const auto& entry : j.at("captures")) {
            CaptureFileEntry e;
            e.file = entry.at("file").get<std::string>();
            e.format = entry.at("format").get<std::string>();
            manifest.captures.push_back(std::move(e));
        }
    } catch (const ordered_json::exception& e) {
        throw IoError(file.string() + ": " + e.what());
    }
    return manifest;
}

} // namespace chirpcal
