#pragma once

// Log records, latency/throughput statistics, significance tests and the
// CSV pipeline. Pure functions over in-memory data; no clock, no RNG.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dsekp::metrics {

enum class Variant { Psk, Dsekp };

// Virtual epoch starts at 0; timestamps render as UTC from there.
std::string format_iso8601_ms(uint64_t epoch_ms);

// One row of the sender-side log. sessctr_id is engaged exactly for the
// session variant.
struct ClientLogRecord {
    uint64_t seq = 0;
    std::optional<uint16_t> sessctr_id;
    std::string timestamp;  // ISO-8601 of sendts_ms
    std::string dev_id;
    std::string plaintext;
    std::string iv_hex;
    std::string tag_hex;
    std::string ciphertext_hex;
    uint64_t sendts_ms = 0;
    uint64_t payload_size = 0;  // bytes of the encoded wire message

    bool operator==(const ClientLogRecord&) const = default;
};

// One row of the receiver-side log, produced only for accepted packets.
struct ServerLogRecord {
    uint64_t seq = 0;
    std::string timestamp;  // ISO-8601 of recvts_ms
    std::string dev_id;
    std::optional<uint16_t> sessctr_id;
    std::string ciphertext_hex;
    std::string iv_hex;
    std::string tag_hex;
    std::string plaintext;  // decrypted
    uint64_t recvts_ms = 0;
    double latency_ms = 0.0;
    uint64_t payload_size = 0;
    uint64_t bin_1s = 0;        // floor(recvts_ms / 1000)
    double throughput_bps = 0.0;  // stamped per bin after the run

    bool operator==(const ServerLogRecord&) const = default;
};

struct OutlierFilter {
    std::vector<double> kept;
    size_t excluded = 0;
};

// Drops samples above 10 s; they would otherwise dominate the moments.
OutlierFilter filter_outliers(const std::vector<double>& latencies_ms,
                              double threshold_ms = 10000.0);

struct LatencyStats {
    size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;  // sample, n - 1
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
};

// Throws std::invalid_argument for fewer than two samples.
LatencyStats latency_stats(const std::vector<double>& samples);

// Nearest-rank percentile: value at rank ceil(p/100 * n), 1-indexed.
// `percent` must be in [1, 100].
double nearest_rank_percentile(std::vector<double> samples, unsigned percent);

struct BinThroughput {
    uint64_t packets = 0;
    uint64_t payload_bytes = 0;
    double bps() const { return 8.0 * static_cast<double>(payload_bytes); }
};

std::map<uint64_t, BinThroughput> throughput_bins(const std::vector<ServerLogRecord>& records);

// Writes each record's per-bin throughput back into the rows.
void stamp_throughput(std::vector<ServerLogRecord>& records);

// 100 * (dsekp - psk) / psk. Throws std::invalid_argument when the
// baseline payload is not positive.
double payload_overhead_pct(double psk_mean_payload, double dsekp_mean_payload);

struct Reliability {
    double percent = 0.0;
    uint64_t losses = 0;
    uint64_t duplicates = 0;
};

// accepted_unique must not exceed sent.
Reliability reliability(uint64_t sent, uint64_t accepted_unique, uint64_t duplicates);

// Two-sample comparison, sign convention first minus second throughout,
// so a smaller-latency first group yields negative d and delta.
struct Significance {
    double t_stat = 0.0;
    double t_df = 0.0;
    double t_p = 1.0;  // Welch, two-sided
    double u_stat = 0.0;
    double z = 0.0;
    double u_p = 1.0;  // rank-sum normal approximation, tie-corrected
    double cohens_d = 0.0;
    double cliffs_delta = 0.0;
};

Significance significance(const std::vector<double>& first, const std::vector<double>& second);

// --- CSV ---------------------------------------------------------------

// RFC 4180: fields holding comma, quote or newline are quoted, embedded
// quotes doubled. latency_ms uses 3 decimals, throughput 1.
void write_client_csv(const std::filesystem::path& path, Variant variant,
                      const std::vector<ClientLogRecord>& records);
void write_server_csv(const std::filesystem::path& path, Variant variant,
                      const std::vector<ServerLogRecord>& records);

struct ClientCsv {
    Variant variant;
    std::vector<ClientLogRecord> records;
};
struct ServerCsv {
    Variant variant;
    std::vector<ServerLogRecord> records;
};

// Infer the variant from the header. Throw std::runtime_error on an
// unrecognizable header or malformed row.
ClientCsv read_client_csv(const std::filesystem::path& path);
ServerCsv read_server_csv(const std::filesystem::path& path);

// --- Cross-variant comparison ------------------------------------------

struct VariantStats {
    size_t rows = 0;
    size_t outliers_excluded = 0;
    LatencyStats latency;
    double mean_payload = 0.0;
    // Mean packets per non-empty 1 s bin; matches a per-bin accounting.
    double mean_pps_bins = 0.0;
    // Packets divided by elapsed receive span; the end-to-end rate.
    double pps_elapsed = 0.0;
    double mean_bin_bps = 0.0;
};

VariantStats variant_stats(const std::vector<ServerLogRecord>& records);

struct ComparisonSummary {
    VariantStats psk;
    VariantStats dsekp;
    double overhead_pct = 0.0;
    double mean_delta_ms = 0.0;  // dsekp - psk
    Significance sig;            // psk vs dsekp (first = psk)
};

ComparisonSummary compare_runs(const std::vector<ServerLogRecord>& psk,
                               const std::vector<ServerLogRecord>& dsekp);

std::string render_comparison_table(const ComparisonSummary& s);
std::string comparison_to_json(const ComparisonSummary& s);  // single line

}  // namespace dsekp::metrics
