#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chirpcal/benchmark.hpp"
#include "chirpcal/calibration.hpp"
#include "chirpcal/netsim.hpp"
#include "chirpcal/optimizer.hpp"
#include "chirpcal/signal.hpp"

namespace chirpcal {

inline constexpr const char* kToolName = "chirpcal";
inline constexpr const char* kToolVersion = "1.0.0";

/* Raised when a file cannot be opened, parsed, or validated. Parse failures
 * prefix the message with "<file>:<line>: ". */
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/* The %.17g form used for every floating-point field in text output; it
 * round-trips doubles exactly. */
std::string format_double(double value);

/* ---- waveforms --------------------------------------------------------- */

/* Columns: index,t_seconds,i,q. One row per sample. */
void write_signal_csv(const std::filesystem::path& file, const SampledSignal& signal);

/* Rebuilds a signal from its CSV form. The sample rate is recovered from the
 * time column (so the file must hold at least two rows); when sample_rate_hint
 * matches the recovered rate to within 1 ppm the hint is used verbatim. */
SampledSignal read_signal_csv(const std::filesystem::path& file,
                              std::optional<double> sample_rate_hint = {});

/* Columns: epoch,E. Epoch 0 is the cost before the first update. */
void write_history_csv(const std::filesystem::path& file, std::span<const double> history);
std::vector<double> read_history_csv(const std::filesystem::path& file);

/* ---- capture sweeps ----------------------------------------------------- */

/* Columns: temperature,path,pulse_index,sample_index,i,q. Pulse timing is not
 * part of the text form, so the reader needs the sample rate back. */
void write_captures_csv(const std::filesystem::path& file, std::span<const CaptureSet> sweep);
std::vector<CaptureSet> read_captures_csv(const std::filesystem::path& file, double sample_rate);

/* Binary layout (little endian): the 8-byte tag "CCAP0001", a u64 record
 * count, then per record: f64 temperature_C, u8 path (0=P1, 1=P2, 2=P3),
 * u64 pulse_index, u64 sample count, f64 sample_rate_hz, f64 start_time_s,
 * and the samples as consecutive f64 i / f64 q pairs. */
void write_captures_bin(const std::filesystem::path& file, std::span<const CaptureSet> sweep);
std::vector<CaptureSet> read_captures_bin(const std::filesystem::path& file);

/* One object per record with parallel i/q arrays; carries full timing, so it
 * reloads without hints. Far bulkier than the binary form. */
void write_captures_json(const std::filesystem::path& file, std::span<const CaptureSet> sweep);
std::vector<CaptureSet> read_captures_json(const std::filesystem::path& file);

/* ---- calibration tables -------------------------------------------------- */

/* Columns: element,temperature_C,G_meas_dB,phi_meas_deg,k_dB,theta_deg,
 * G_comp_dB,phi_comp_deg. */
void write_calibration_csv(const std::filesystem::path& file,
                           std::span<const CalibrationRecord> records);
std::vector<CalibrationRecord> read_calibration_csv(const std::filesystem::path& file);

/* Full-precision dump (radians) plus the residual summary when present. */
void write_calibration_json(const std::filesystem::path& file,
                            std::span<const CalibrationRecord> records,
                            const std::optional<ResidualSummary>& residuals);

/* Columns: element,uncomp_gain_db,uncomp_phase_deg,comp_gain_db,comp_phase_deg. */
void write_residual_summary_csv(const std::filesystem::path& file,
                                const ResidualSummary& summary);

/* ---- optimizer benchmarks ------------------------------------------------ */

/* Columns: algorithm,seed,epoch,E. Histories longer than max_rows_per_run are
 * strided down; the first and last epochs of each run are always kept. */
void write_learning_curves_csv(const std::filesystem::path& file, const BenchmarkReport& report,
                               std::size_t max_rows_per_run = 2000);

/* Per-algorithm convergence statistics. */
void write_benchmark_json(const std::filesystem::path& file, const BenchmarkReport& report);

/* Single fit outcome (history goes to write_history_csv separately); pass the
 * estimated group delay when the fit ran through the alignment front end. */
void write_fit_json(const std::filesystem::path& file, const FitResult& result,
                    std::optional<double> group_delay_s = {});

/* ---- run manifest -------------------------------------------------------- */

struct CaptureFileEntry {
    std::string file;   // relative to the manifest's directory
    std::string format; // "csv" or "bin"
};

/* Inventory written by `simulate` and consumed by `calibrate`; holds only
 * what is needed to reload the run (never the applied distortions). */
struct Manifest {
    std::string config_file; // relative to the manifest's directory
    std::string config_hash;
    std::uint64_t seed = 0;
    double sample_rate_hz = 0.0;
    std::size_t temperature_count = 0;
    std::size_t pulses_per_dwell = 0;
    std::vector<CaptureFileEntry> captures;
};

void write_manifest_json(const std::filesystem::path& file, const Manifest& manifest);
Manifest read_manifest_json(const std::filesystem::path& file);

} // namespace chirpcal
