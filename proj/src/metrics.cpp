#include "dsekp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dsekp::metrics {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample variance, n - 1 denominator.
double variance_of(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size() - 1);
}

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction;
// feeds the Student-t tail below.
double betacf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 3e-15) break;
    }
    return h;
}

double ibeta_reg(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-sided Student-t p-value: I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    return ibeta_reg(df / 2.0, 0.5, df / (df + t * t));
}

double normal_two_sided_p(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// --- CSV plumbing -------------------------------------------------------

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_field(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_field(fields[i]);
    }
    os << '\n';
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    size_t i = 0;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (row.size() > 1 || !row[0].empty()) rows.push_back(std::move(row));
        row.clear();
    };

    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() || field_started || !row.empty()) end_row();
        } else if (c == '\r') {
            // swallowed; \r\n is handled by the \n branch
        } else {
            field += c;
            field_started = true;
        }
        ++i;
    }
    if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
    if (!field.empty() || field_started || !row.empty()) end_row();
    return rows;
}

uint64_t parse_u64(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("csv: bad integer in column ") + what);
    }
}

double parse_f64(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("csv: bad number in column ") + what);
    }
}

const std::vector<std::string> kClientHeaderPsk = {
    "seq", "timestamp", "dev_id", "plaintext", "iv", "tag", "ciphertext",
    "sendts_ms", "payload_size"};
const std::vector<std::string> kClientHeaderDsekp = {
    "seq", "sessctr_id", "timestamp", "dev_id", "plaintext", "iv", "tag", "ciphertext",
    "sendts_ms", "payload_size"};
const std::vector<std::string> kServerHeaderPsk = {
    "seq", "timestamp", "dev_id", "ciphertext", "iv", "tag", "plaintext",
    "recvts_ms", "latency_ms", "payload_size", "bin_1s", "throughput"};
const std::vector<std::string> kServerHeaderDsekp = {
    "seq", "timestamp", "dev_id", "sessctr_id", "ciphertext", "iv", "tag", "plaintext",
    "recvts_ms", "latency_ms", "payload_size", "bin_1s", "throughput"};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string format_iso8601_ms(uint64_t epoch_ms) {
    std::time_t secs = static_cast<std::time_t>(epoch_ms / 1000);
    unsigned ms = static_cast<unsigned>(epoch_ms % 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03uZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
    return buf;
}

OutlierFilter filter_outliers(const std::vector<double>& latencies_ms, double threshold_ms) {
    OutlierFilter out;
    out.kept.reserve(latencies_ms.size());
    for (double v : latencies_ms) {
        if (v > threshold_ms)
            out.excluded++;
        else
            out.kept.push_back(v);
    }
    return out;
}

double nearest_rank_percentile(std::vector<double> samples, unsigned percent) {
    if (samples.empty()) throw std::invalid_argument("percentile of empty sample");
    if (percent < 1 || percent > 100) throw std::invalid_argument("percentile out of [1,100]");
    std::sort(samples.begin(), samples.end());
    // ceil(percent/100 * n) in exact integer arithmetic; the float round
    // trip misranks boundary cases like p95 of n=20.
    size_t rank = (static_cast<size_t>(percent) * samples.size() + 99) / 100;
    return samples[rank - 1];
}

LatencyStats latency_stats(const std::vector<double>& samples) {
    if (samples.size() < 2) throw std::invalid_argument("latency_stats needs at least 2 samples");
    LatencyStats st;
    st.n = samples.size();
    st.mean = mean_of(samples);
    st.stddev = std::sqrt(variance_of(samples, st.mean));

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    size_t n = sorted.size();
    st.median = (n % 2 == 1) ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;

    double half = 1.96 * st.stddev / std::sqrt(static_cast<double>(n));
    st.ci95_lo = st.mean - half;
    st.ci95_hi = st.mean + half;
    st.p95 = nearest_rank_percentile(sorted, 95);
    st.p99 = nearest_rank_percentile(sorted, 99);
    return st;
}

std::map<uint64_t, BinThroughput> throughput_bins(const std::vector<ServerLogRecord>& records) {
    std::map<uint64_t, BinThroughput> bins;
    for (const auto& r : records) {
        auto& b = bins[r.bin_1s];
        b.packets++;
        b.payload_bytes += r.payload_size;
    }
    return bins;
}

void stamp_throughput(std::vector<ServerLogRecord>& records) {
    auto bins = throughput_bins(records);
    for (auto& r : records) r.throughput_bps = bins[r.bin_1s].bps();
}

double payload_overhead_pct(double psk_mean_payload, double dsekp_mean_payload) {
    if (psk_mean_payload <= 0.0)
        throw std::invalid_argument("baseline payload must be positive");
    return 100.0 * (dsekp_mean_payload - psk_mean_payload) / psk_mean_payload;
}

Reliability reliability(uint64_t sent, uint64_t accepted_unique, uint64_t duplicates) {
    if (accepted_unique > sent)
        throw std::invalid_argument("accepted exceeds sent");
    Reliability r;
    r.percent = sent == 0 ? 0.0 : 100.0 * static_cast<double>(accepted_unique) /
                                       static_cast<double>(sent);
    r.losses = sent - accepted_unique;
    r.duplicates = duplicates;
    return r;
}

Significance significance(const std::vector<double>& first, const std::vector<double>& second) {
    if (first.size() < 2 || second.size() < 2)
        throw std::invalid_argument("significance needs at least 2 samples per group");
    Significance s;
    const double na = static_cast<double>(first.size());
    const double nb = static_cast<double>(second.size());
    const double ma = mean_of(first), mb = mean_of(second);
    const double va = variance_of(first, ma), vb = variance_of(second, mb);

    // Welch's t with Welch-Satterthwaite degrees of freedom.
    const double se2 = va / na + vb / nb;
    if (se2 > 0.0) {
        s.t_stat = (ma - mb) / std::sqrt(se2);
        s.t_df = se2 * se2 /
                 ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
        s.t_p = student_t_two_sided_p(s.t_stat, s.t_df);
    } else {
        s.t_stat = 0.0;
        s.t_df = na + nb - 2.0;
        s.t_p = ma == mb ? 1.0 : 0.0;
    }

    // Rank-sum statistic from midranks over the pooled sample.
    struct Tagged {
        double value;
        bool from_first;
    };
    std::vector<Tagged> pooled;
    pooled.reserve(first.size() + second.size());
    for (double v : first) pooled.push_back({v, true});
    for (double v : second) pooled.push_back({v, false});
    std::sort(pooled.begin(), pooled.end(),
              [](const Tagged& a, const Tagged& b) { return a.value < b.value; });

    const double n_total = na + nb;
    double rank_sum_first = 0.0;
    double tie_term = 0.0;  // sum of t^3 - t over tie groups
    size_t i = 0;
    while (i < pooled.size()) {
        size_t j = i;
        while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
        const double t = static_cast<double>(j - i);
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k)
            if (pooled[k].from_first) rank_sum_first += midrank;
        tie_term += t * t * t - t;
        i = j;
    }
    s.u_stat = rank_sum_first - na * (na + 1.0) / 2.0;
    const double mu = na * nb / 2.0;
    const double var_u = na * nb / 12.0 *
                         ((n_total + 1.0) - tie_term / (n_total * (n_total - 1.0)));
    if (var_u > 0.0) {
        s.z = (s.u_stat - mu) / std::sqrt(var_u);
        s.u_p = normal_two_sided_p(s.z);
    } else {
        s.z = 0.0;
        s.u_p = 1.0;
    }

    // Cohen's d with the pooled standard deviation.
    const double pooled_var = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    s.cohens_d = pooled_var > 0.0 ? (ma - mb) / std::sqrt(pooled_var) : 0.0;

    // Cliff's delta via binary search against the sorted second group.
    std::vector<double> sorted_b(second);
    std::sort(sorted_b.begin(), sorted_b.end());
    int64_t wins = 0, losses = 0;
    for (double v : first) {
        auto lo = std::lower_bound(sorted_b.begin(), sorted_b.end(), v);
        auto hi = std::upper_bound(sorted_b.begin(), sorted_b.end(), v);
        wins += lo - sorted_b.begin();
        losses += sorted_b.end() - hi;
    }
    s.cliffs_delta = static_cast<double>(wins - losses) / (na * nb);
    return s;
}

// --- CSV ---------------------------------------------------------------

void write_client_csv(const std::filesystem::path& path, Variant variant,
                      const std::vector<ClientLogRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    const bool dsekp = variant == Variant::Dsekp;
    write_row(os, dsekp ? kClientHeaderDsekp : kClientHeaderPsk);
    for (const auto& r : records) {
        if (r.sessctr_id.has_value() != dsekp)
            throw std::logic_error("client record variant mismatch");
        std::vector<std::string> row;
        row.push_back(std::to_string(r.seq));
        if (dsekp) row.push_back(std::to_string(*r.sessctr_id));
        row.push_back(r.timestamp);
        row.push_back(r.dev_id);
        row.push_back(r.plaintext);
        row.push_back(r.iv_hex);
        row.push_back(r.tag_hex);
        row.push_back(r.ciphertext_hex);
        row.push_back(std::to_string(r.sendts_ms));
        row.push_back(std::to_string(r.payload_size));
        write_row(os, row);
    }
}

void write_server_csv(const std::filesystem::path& path, Variant variant,
                      const std::vector<ServerLogRecord>& records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    const bool dsekp = variant == Variant::Dsekp;
    write_row(os, dsekp ? kServerHeaderDsekp : kServerHeaderPsk);
    for (const auto& r : records) {
        if (r.sessctr_id.has_value() != dsekp)
            throw std::logic_error("server record variant mismatch");
        std::vector<std::string> row;
        row.push_back(std::to_string(r.seq));
        row.push_back(r.timestamp);
        row.push_back(r.dev_id);
        if (dsekp) row.push_back(std::to_string(*r.sessctr_id));
        row.push_back(r.ciphertext_hex);
        row.push_back(r.iv_hex);
        row.push_back(r.tag_hex);
        row.push_back(r.plaintext);
        row.push_back(std::to_string(r.recvts_ms));
        row.push_back(format_fixed(r.latency_ms, 3));
        row.push_back(std::to_string(r.payload_size));
        row.push_back(std::to_string(r.bin_1s));
        row.push_back(format_fixed(r.throughput_bps, 1));
        write_row(os, row);
    }
}

ClientCsv read_client_csv(const std::filesystem::path& path) {
    auto rows = parse_csv(read_file(path));
    if (rows.empty()) throw std::runtime_error("csv: empty file " + path.string());
    ClientCsv out;
    if (rows[0] == kClientHeaderDsekp)
        out.variant = Variant::Dsekp;
    else if (rows[0] == kClientHeaderPsk)
        out.variant = Variant::Psk;
    else
        throw std::runtime_error("csv: unrecognized client header in " + path.string());
    const bool dsekp = out.variant == Variant::Dsekp;
    const size_t width = rows[0].size();
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != width) throw std::runtime_error("csv: ragged row in " + path.string());
        ClientLogRecord rec;
        size_t c = 0;
        rec.seq = parse_u64(row[c++], "seq");
        if (dsekp) rec.sessctr_id = static_cast<uint16_t>(parse_u64(row[c++], "sessctr_id"));
        rec.timestamp = row[c++];
        rec.dev_id = row[c++];
        rec.plaintext = row[c++];
        rec.iv_hex = row[c++];
        rec.tag_hex = row[c++];
        rec.ciphertext_hex = row[c++];
        rec.sendts_ms = parse_u64(row[c++], "sendts_ms");
        rec.payload_size = parse_u64(row[c++], "payload_size");
        out.records.push_back(std::move(rec));
    }
    return out;
}

ServerCsv read_server_csv(const std::filesystem::path& path) {
    auto rows = parse_csv(read_file(path));
    if (rows.empty()) throw std::runtime_error("csv: empty file " + path.string());
    ServerCsv out;
    if (rows[0] == kServerHeaderDsekp)
        out.variant = Variant::Dsekp;
    else if (rows[0] == kServerHeaderPsk)
        out.variant = Variant::Psk;
    else
        throw std::runtime_error("csv: unrecognized server header in " + path.string());
    const bool dsekp = out.variant == Variant::Dsekp;
    const size_t width = rows[0].size();
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != width) throw std::runtime_error("csv: ragged row in " + path.string());
        ServerLogRecord rec;
        size_t c = 0;
        rec.seq = parse_u64(row[c++], "seq");
        rec.timestamp = row[c++];
        rec.dev_id = row[c++];
        if (dsekp) rec.sessctr_id = static_cast<uint16_t>(parse_u64(row[c++], "sessctr_id"));
        rec.ciphertext_hex = row[c++];
        rec.iv_hex = row[c++];
        rec.tag_hex = row[c++];
        rec.plaintext = row[c++];
        rec.recvts_ms = parse_u64(row[c++], "recvts_ms");
        rec.latency_ms = parse_f64(row[c++], "latency_ms");
        rec.payload_size = parse_u64(row[c++], "payload_size");
        rec.bin_1s = parse_u64(row[c++], "bin_1s");
        rec.throughput_bps = parse_f64(row[c++], "throughput");
        out.records.push_back(std::move(rec));
    }
    return out;
}

// --- Comparison ----------------------------------------------------------

VariantStats variant_stats(const std::vector<ServerLogRecord>& records) {
    VariantStats vs;
    vs.rows = records.size();
    std::vector<double> latencies;
    latencies.reserve(records.size());
    double payload_sum = 0.0;
    uint64_t min_recv = UINT64_MAX, max_recv = 0;
    for (const auto& r : records) {
        latencies.push_back(r.latency_ms);
        payload_sum += static_cast<double>(r.payload_size);
        min_recv = std::min(min_recv, r.recvts_ms);
        max_recv = std::max(max_recv, r.recvts_ms);
    }
    auto filtered = filter_outliers(latencies);
    vs.outliers_excluded = filtered.excluded;
    vs.latency = latency_stats(filtered.kept);
    vs.mean_payload = payload_sum / static_cast<double>(records.size());

    auto bins = throughput_bins(records);
    double pps_sum = 0.0, bps_sum = 0.0;
    for (const auto& [_, b] : bins) {
        pps_sum += static_cast<double>(b.packets);
        bps_sum += b.bps();
    }
    vs.mean_pps_bins = pps_sum / static_cast<double>(bins.size());
    vs.mean_bin_bps = bps_sum / static_cast<double>(bins.size());
    double span_s = static_cast<double>(max_recv - min_recv) / 1000.0;
    vs.pps_elapsed = span_s > 0.0 ? static_cast<double>(records.size()) / span_s : 0.0;
    return vs;
}

ComparisonSummary compare_runs(const std::vector<ServerLogRecord>& psk,
                               const std::vector<ServerLogRecord>& dsekp) {
    ComparisonSummary s;
    s.psk = variant_stats(psk);
    s.dsekp = variant_stats(dsekp);
    s.overhead_pct = payload_overhead_pct(s.psk.mean_payload, s.dsekp.mean_payload);
    s.mean_delta_ms = s.dsekp.latency.mean - s.psk.latency.mean;

    auto lat = [](const std::vector<ServerLogRecord>& records) {
        std::vector<double> v;
        v.reserve(records.size());
        for (const auto& r : records) v.push_back(r.latency_ms);
        return filter_outliers(v).kept;
    };
    s.sig = significance(lat(psk), lat(dsekp));
    return s;
}

std::string render_comparison_table(const ComparisonSummary& s) {
    std::ostringstream os;
    auto row = [&](const std::string& metric, const std::string& a, const std::string& b) {
        os << metric;
        os << std::string(metric.size() < 28 ? 28 - metric.size() : 1, ' ') << a;
        os << std::string(a.size() < 20 ? 20 - a.size() : 1, ' ') << b << '\n';
    };
    auto sci = [](double p) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3e", p);
        return std::string(buf);
    };
    row("metric", "static-key", "per-session");
    row("------", "----------", "-----------");
    row("samples (kept)", std::to_string(s.psk.latency.n), std::to_string(s.dsekp.latency.n));
    row("outliers excluded", std::to_string(s.psk.outliers_excluded),
        std::to_string(s.dsekp.outliers_excluded));
    row("mean latency (ms)", format_fixed(s.psk.latency.mean, 2),
        format_fixed(s.dsekp.latency.mean, 2));
    row("median latency (ms)", format_fixed(s.psk.latency.median, 2),
        format_fixed(s.dsekp.latency.median, 2));
    row("latency std (ms)", format_fixed(s.psk.latency.stddev, 2),
        format_fixed(s.dsekp.latency.stddev, 2));
    row("p95 latency (ms)", format_fixed(s.psk.latency.p95, 2),
        format_fixed(s.dsekp.latency.p95, 2));
    row("p99 latency (ms)", format_fixed(s.psk.latency.p99, 2),
        format_fixed(s.dsekp.latency.p99, 2));
    row("mean payload (bytes)", format_fixed(s.psk.mean_payload, 1),
        format_fixed(s.dsekp.mean_payload, 1));
    row("mean rate (pkt/bin)", format_fixed(s.psk.mean_pps_bins, 2),
        format_fixed(s.dsekp.mean_pps_bins, 2));
    row("elapsed rate (pkt/s)", format_fixed(s.psk.pps_elapsed, 2),
        format_fixed(s.dsekp.pps_elapsed, 2));
    os << '\n';
    row("payload overhead (%)", format_fixed(s.overhead_pct, 2), "");
    row("mean latency delta (ms)", format_fixed(s.mean_delta_ms, 2), "");
    row("welch t p (two-sided)", sci(s.sig.t_p), "");
    row("rank-sum p (two-sided)", sci(s.sig.u_p), "");
    row("cohen's d", format_fixed(s.sig.cohens_d, 3), "");
    row("cliff's delta", format_fixed(s.sig.cliffs_delta, 3), "");
    return os.str();
}

std::string comparison_to_json(const ComparisonSummary& s) {
    using nlohmann::ordered_json;
    auto variant_json = [](const VariantStats& v) {
        ordered_json j;
        j["rows"] = v.rows;
        j["outliers_excluded"] = v.outliers_excluded;
        j["latency"] = {{"n", v.latency.n},
                        {"mean_ms", v.latency.mean},
                        {"median_ms", v.latency.median},
                        {"stddev_ms", v.latency.stddev},
                        {"ci95_lo_ms", v.latency.ci95_lo},
                        {"ci95_hi_ms", v.latency.ci95_hi},
                        {"p95_ms", v.latency.p95},
                        {"p99_ms", v.latency.p99}};
        j["mean_payload_bytes"] = v.mean_payload;
        j["mean_pps_bins"] = v.mean_pps_bins;
        j["pps_elapsed"] = v.pps_elapsed;
        j["mean_bin_bps"] = v.mean_bin_bps;
        return j;
    };
    ordered_json j;
    j["psk"] = variant_json(s.psk);
    j["dsekp"] = variant_json(s.dsekp);
    j["comparison"] = {{"payload_overhead_pct", s.overhead_pct},
                       {"mean_latency_delta_ms", s.mean_delta_ms},
                       {"welch_t", s.sig.t_stat},
                       {"welch_df", s.sig.t_df},
                       {"welch_p", s.sig.t_p},
                       {"ranksum_u", s.sig.u_stat},
                       {"ranksum_z", s.sig.z},
                       {"ranksum_p", s.sig.u_p},
                       {"cohens_d", s.sig.cohens_d},
                       {"cliffs_delta", s.sig.cliffs_delta}};
    return j.dump();
}

}  // namespace dsekp::metrics
