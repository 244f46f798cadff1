#include "dsekp/runner.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "dsekp/device.hpp"
#include "dsekp/edge.hpp"

namespace dsekp::runner {

namespace {

using ordered_json = nlohmann::ordered_json;

// Seed stream tags; every component draws from its own generator.
constexpr uint64_t kStreamBroker = 1;
constexpr uint64_t kStreamAdversary = 2;
constexpr uint64_t kStreamPskKey = 3;
constexpr uint64_t kStreamIdentity = 100;  // + device index
constexpr uint64_t kStreamDevice = 1000;   // + device index

Bytes random_bytes(std::mt19937_64& rng, size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<uint8_t>(rng() & 0xff);
    return out;
}

std::string device_name(uint32_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "esp32-%02u", index + 1);
    return buf;
}

// Drives one device through handshakes, rotations and the send schedule.
struct DeviceDriver {
    Device device;
    uint32_t sent_total = 0;
    uint32_t sent_in_session = 0;
    uint32_t init_resends = 0;
    uint64_t session_started_ms = 0;

    DeviceDriver(crypto::DeviceIdentity identity, uint64_t rng_seed)
        : device(std::move(identity), rng_seed) {}
};

class Orchestrator {
  public:
    Orchestrator(const RunProfile& p)
        : p_(p),
          broker_(transport::NetworkModel{p.latency_base_ms, p.latency_jitter_ms, p.loss, p.dup,
                                          derive_seed(p.seed, kStreamBroker)},
                  clock_) {
        p_.validate();

        std::mt19937_64 psk_rng(derive_seed(p_.seed, kStreamPskKey));
        auto key = random_bytes(psk_rng, crypto::kAesKeyLen);
        std::copy(key.begin(), key.end(), psk_key_.begin());

        for (uint32_t i = 0; i < p_.devices; ++i) {
            std::mt19937_64 id_rng(derive_seed(p_.seed, kStreamIdentity + i));
            crypto::DeviceIdentity identity;
            identity.dev_id = device_name(i);
            identity.dev_secret = random_bytes(id_rng, 16);
            identity.edge_salt = random_bytes(id_rng, 16);
            edge_.register_device(identity);
            drivers_.push_back(std::make_unique<DeviceDriver>(
                identity, derive_seed(p_.seed, kStreamDevice + i)));
            if (p_.mode == Mode::Psk) drivers_.back()->device.configure_psk(psk_key_);
        }

        wire_edge();
        for (auto& drv : drivers_) {
            DeviceDriver* d = drv.get();
            if (p_.mode == Mode::Dsekp)
                broker_.schedule(0, [this, d] { send_init(d, true); });
            else
                broker_.schedule(0, [this, d] { send_data(d); });
        }
    }

    void attach_attack_report(adversary::AttackReport* report) { attack_report_ = report; }

    transport::Broker& broker() { return broker_; }
    transport::VirtualClock& clock() { return clock_; }
    Edge& edge() { return edge_; }

    uint64_t quiescence_horizon() const {
        return static_cast<uint64_t>(p_.packets) * p_.interval_ms + 3'600'000ULL;
    }

    RunArtifacts collect(bool quiescent) {
        RunArtifacts art;
        art.client = std::move(client_);
        art.server = std::move(server_);
        art.counters = counters_;
        art.trace = broker_.trace();
        art.topic_stats = broker_.topic_stats();
        art.sessions_json = p_.mode == Mode::Dsekp ? edge_.sessions_to_json() : "[]";
        art.finished_at_ms = clock_.now_ms();
        art.quiescent = quiescent;
        if (quiescent) broker_.check_conservation();
        metrics::stamp_throughput(art.server);
        return art;
    }

  private:
    bool from_adversary(const transport::Delivery& d) const {
        return d.source == adversary::kSource;
    }

    void tally_reject(const transport::Delivery& d, const std::string& reason) {
        if (from_adversary(d)) {
            if (attack_report_) attack_report_->rejected[reason]++;
        } else {
            counters_.rejections[reason]++;
        }
    }

    void wire_edge() {
        if (p_.mode == Mode::Psk) {
            broker_.subscribe(wire::kTopicPskData,
                              [this](const transport::Delivery& d) { on_psk_data(d); });
            return;
        }
        broker_.subscribe(wire::kTopicData,
                          [this](const transport::Delivery& d) { on_dsekp_data(d); });
        broker_.subscribe(wire::kTopicInit,
                          [this](const transport::Delivery& d) { on_init(d); });
        for (uint32_t i = 0; i < p_.devices; ++i) {
            DeviceDriver* d = drivers_[i].get();
            broker_.subscribe(wire::ack_topic(d->device.identity().dev_id),
                              [this, d](const transport::Delivery& del) { on_ack(d, del); });
        }
    }

    // --- edge side ------------------------------------------------------

    void on_init(const transport::Delivery& d) {
        auto decoded = wire::decode(d.topic, d.body);
        auto* msg = std::get_if<wire::Message>(&decoded);
        if (!msg || !std::holds_alternative<wire::InitMessage>(*msg)) {
            tally_reject(d, "decode_error");
            return;
        }
        auto outcome = edge_.handle_init(std::get<wire::InitMessage>(*msg), clock_.now_ms());
        if (outcome.rejected) {
            tally_reject(d, to_string(*outcome.rejected));
        } else if (from_adversary(d) && attack_report_) {
            attack_report_->accepted++;
        }
        broker_.publish(wire::ack_topic(outcome.ack.dev_id), wire::encode(outcome.ack), "edge");
    }

    void on_dsekp_data(const transport::Delivery& d) {
        auto decoded = wire::decode(d.topic, d.body);
        auto* msg = std::get_if<wire::Message>(&decoded);
        if (!msg || !std::holds_alternative<wire::DsekpDataPacket>(*msg)) {
            tally_reject(d, "decode_error");
            return;
        }
        auto result = edge_.handle_data(std::get<wire::DsekpDataPacket>(*msg), clock_.now_ms());
        if (auto* reject = std::get_if<DataReject>(&result)) {
            tally_reject(d, to_string(*reject));
            return;
        }
        auto& outcome = std::get<DataOutcome>(result);
        if (from_adversary(d)) {
            if (attack_report_) attack_report_->accepted++;
            return;  // the attacker's wins never enter the honest log
        }
        counters_.accepted_unique++;
        server_.push_back(std::move(outcome.record));
    }

    void on_psk_data(const transport::Delivery& d) {
        auto decoded = wire::decode(d.topic, d.body);
        auto* msg = std::get_if<wire::Message>(&decoded);
        if (!msg || !std::holds_alternative<wire::PskDataPacket>(*msg)) {
            tally_reject(d, "decode_error");
            return;
        }
        auto result =
            edge_.handle_psk_data(psk_key_, std::get<wire::PskDataPacket>(*msg), clock_.now_ms());
        if (auto* reject = std::get_if<DataReject>(&result)) {
            tally_reject(d, to_string(*reject));
            return;
        }
        auto& outcome = std::get<DataOutcome>(result);
        if (from_adversary(d)) {
            if (attack_report_) {
                attack_report_->accepted++;
                if (outcome.duplicate) attack_report_->accepted_duplicates++;
            }
            return;
        }
        if (outcome.duplicate)
            counters_.accepted_duplicates++;
        else
            counters_.accepted_unique++;
        server_.push_back(std::move(outcome.record));
    }

    // --- device side ------------------------------------------------------

    void send_init(DeviceDriver* d, bool fresh) {
        const uint64_t now = clock_.now_ms();
        if (fresh) {
            d->init_resends = 0;
            d->device.simulate_reboot();  // discard any abandoned session state
        }
        wire::InitMessage init = fresh ? d->device.begin_session(now) : d->device.current_init();
        counters_.inits_sent++;
        broker_.publish(wire::kTopicInit, wire::encode(init), d->device.identity().dev_id);
        const uint16_t ctr = init.sess_ctr;
        broker_.schedule(now + p_.ack_timeout_ms, [this, d, ctr] { on_ack_timeout(d, ctr); });
    }

    void on_ack_timeout(DeviceDriver* d, uint16_t ctr) {
        if (d->device.phase() != Phase::AwaitAck) return;  // already resolved
        const auto* s = d->device.session();
        if (!s || s->params.sess_ctr != ctr) return;  // timer for an older attempt
        if (d->init_resends < p_.max_init_retries) {
            d->init_resends++;
            send_init(d, false);
        } else {
            send_init(d, true);
        }
    }

    void on_ack(DeviceDriver* d, const transport::Delivery& del) {
        auto decoded = wire::decode(del.topic, del.body);
        auto* msg = std::get_if<wire::Message>(&decoded);
        if (!msg || !std::holds_alternative<wire::InitAck>(*msg)) return;
        if (d->device.phase() != Phase::AwaitAck) return;  // duplicate or stale ack

        auto err = d->device.on_ack(std::get<wire::InitAck>(*msg));
        if (!err) {
            counters_.acks_ok++;
            d->sent_in_session = 0;
            d->session_started_ms = clock_.now_ms();
            send_data(d);
            return;
        }
        // A rejection for the current attempt means this counter is burnt
        // (typically our earlier init landed but its ack was lost); retry
        // with fresh parameters right away. Mismatched or unverifiable
        // acks are ignored; the timeout path owns those.
        if (*err == AckError::Rejected) send_init(d, true);
    }

    void send_data(DeviceDriver* d) {
        if (d->sent_total >= p_.packets) return;
        const uint64_t now = clock_.now_ms();

        if (p_.mode == Mode::Dsekp) {
            if (p_.reboot_every && d->sent_in_session >= *p_.reboot_every) {
                send_init(d, true);
                return;  // the ack handler resumes the schedule
            }
            if (!p_.reboot_every &&
                now - d->session_started_ms >= p_.session_timeout_s * 1000) {
                send_init(d, true);
                return;
            }
        }

        const std::string reading = d->device.next_reading();
        std::string body;
        metrics::ClientLogRecord rec;
        if (p_.mode == Mode::Dsekp) {
            auto pkt = d->device.next_data_packet(reading, now);
            body = wire::encode(pkt);
            rec.seq = pkt.seq;
            rec.sessctr_id = pkt.sessctr_id;
            rec.iv_hex = to_hex(pkt.iv);
            rec.tag_hex = to_hex(pkt.tag);
            rec.ciphertext_hex = to_hex(pkt.ciphertext);
        } else {
            auto pkt = d->device.next_psk_packet(reading, now);
            body = wire::encode(pkt);
            rec.seq = pkt.seq;
            rec.iv_hex = to_hex(pkt.iv);
            rec.tag_hex = to_hex(pkt.tag);
            rec.ciphertext_hex = to_hex(pkt.ciphertext);
        }
        rec.timestamp = metrics::format_iso8601_ms(now);
        rec.dev_id = d->device.identity().dev_id;
        rec.plaintext = reading;
        rec.sendts_ms = now;
        rec.payload_size = body.size();
        client_.push_back(std::move(rec));
        counters_.data_sent++;

        broker_.publish(p_.mode == Mode::Dsekp ? wire::kTopicData : wire::kTopicPskData,
                        std::move(body), d->device.identity().dev_id);
        d->sent_total++;
        d->sent_in_session++;
        if (d->sent_total < p_.packets)
            broker_.schedule(now + p_.interval_ms, [this, d] { send_data(d); });
    }

    RunProfile p_;
    transport::VirtualClock clock_;
    transport::Broker broker_;
    Edge edge_;
    crypto::AesKey psk_key_{};
    std::vector<std::unique_ptr<DeviceDriver>> drivers_;
    std::vector<metrics::ClientLogRecord> client_;
    std::vector<metrics::ServerLogRecord> server_;
    RunCounters counters_;
    adversary::AttackReport* attack_report_ = nullptr;
};

}  // namespace

std::optional<Mode> parse_mode(const std::string& name) {
    if (name == "psk") return Mode::Psk;
    if (name == "dsekp") return Mode::Dsekp;
    return std::nullopt;
}

const char* to_string(Mode m) {
    return m == Mode::Psk ? "psk" : "dsekp";
}

void RunProfile::validate() const {
    if (packets == 0) throw std::invalid_argument("packets must be positive");
    if (interval_ms == 0) throw std::invalid_argument("interval-ms must be positive");
    if (devices == 0) throw std::invalid_argument("devices must be positive");
    if (latency_base_ms < 0.0) throw std::invalid_argument("latency-base-ms must be >= 0");
    if (latency_jitter_ms < 0.0) throw std::invalid_argument("latency-jitter-ms must be >= 0");
    if (loss < 0.0 || loss > 1.0) throw std::invalid_argument("loss must be in [0,1]");
    if (dup < 0.0 || dup > 1.0) throw std::invalid_argument("dup must be in [0,1]");
    if (reboot_every && *reboot_every == 0)
        throw std::invalid_argument("reboot-every must be positive");
    if (ack_timeout_ms == 0) throw std::invalid_argument("ack-timeout-ms must be positive");
}

RunArtifacts run_experiment(const RunProfile& profile) {
    Orchestrator orch(profile);
    bool quiescent = orch.broker().run_to_quiescence(orch.quiescence_horizon());
    return orch.collect(quiescent);
}

AttackOutcome run_attack(const RunProfile& profile, const adversary::AttackScenario& scenario) {
    if (scenario.count == 0) throw std::invalid_argument("attack count must be positive");
    Orchestrator orch(profile);

    // First half honest, then the adversary studies everything delivered
    // so far and spreads its injections across the remaining schedule.
    const uint64_t span = static_cast<uint64_t>(profile.packets) * profile.interval_ms;
    const uint64_t midpoint = span / 2;
    orch.broker().run_until(midpoint);

    adversary::Adversary adv(scenario, derive_seed(profile.seed, kStreamAdversary));
    adv.study(orch.broker().trace());

    AttackOutcome out;
    orch.attach_attack_report(&out.report);
    const uint64_t spacing =
        std::max<uint64_t>(1, (span - midpoint) / (static_cast<uint64_t>(scenario.count) + 1));
    adv.arm(orch.broker(), midpoint + spacing, spacing, out.report);

    const uint64_t horizon = orch.quiescence_horizon() +
                             static_cast<uint64_t>(scenario.count) * spacing + 60'000ULL;
    bool quiescent = orch.broker().run_to_quiescence(horizon);
    out.honest = orch.collect(quiescent);
    return out;
}

std::string summary_json(const RunProfile& profile, const RunArtifacts& art) {
    ordered_json j;
    j["profile"] = {{"mode", to_string(profile.mode)},
                    {"packets", profile.packets},
                    {"interval_ms", profile.interval_ms},
                    {"devices", profile.devices},
                    {"latency_base_ms", profile.latency_base_ms},
                    {"latency_jitter_ms", profile.latency_jitter_ms},
                    {"loss", profile.loss},
                    {"dup", profile.dup},
                    {"seed", profile.seed},
                    {"ack_timeout_ms", profile.ack_timeout_ms},
                    {"max_init_retries", profile.max_init_retries},
                    {"session_timeout_s", profile.session_timeout_s}};
    if (profile.reboot_every)
        j["profile"]["reboot_every"] = *profile.reboot_every;
    else
        j["profile"]["reboot_every"] = nullptr;

    j["counters"] = {{"data_sent", art.counters.data_sent},
                     {"accepted_unique", art.counters.accepted_unique},
                     {"accepted_duplicates", art.counters.accepted_duplicates},
                     {"inits_sent", art.counters.inits_sent},
                     {"acks_ok", art.counters.acks_ok}};
    j["counters"]["rejections"] = ordered_json::object();
    for (const auto& [reason, count] : art.counters.rejections)
        j["counters"]["rejections"][reason] = count;

    auto rel = metrics::reliability(art.counters.data_sent, art.counters.accepted_unique,
                                    art.counters.accepted_duplicates);
    j["reliability"] = {{"percent", rel.percent},
                        {"losses", rel.losses},
                        {"duplicates", rel.duplicates}};

    std::vector<double> latencies;
    latencies.reserve(art.server.size());
    for (const auto& r : art.server) latencies.push_back(r.latency_ms);
    auto filtered = metrics::filter_outliers(latencies);
    if (filtered.kept.size() >= 2) {
        auto vs = metrics::variant_stats(art.server);
        j["latency"] = {{"n", vs.latency.n},
                        {"outliers_excluded", vs.outliers_excluded},
                        {"mean_ms", vs.latency.mean},
                        {"median_ms", vs.latency.median},
                        {"stddev_ms", vs.latency.stddev},
                        {"ci95_lo_ms", vs.latency.ci95_lo},
                        {"ci95_hi_ms", vs.latency.ci95_hi},
                        {"p95_ms", vs.latency.p95},
                        {"p99_ms", vs.latency.p99}};
        j["payload"] = {{"mean_bytes", vs.mean_payload}};
        j["throughput"] = {{"mean_pps_bins", vs.mean_pps_bins},
                           {"pps_elapsed", vs.pps_elapsed},
                           {"mean_bin_bps", vs.mean_bin_bps}};
    } else {
        j["latency"] = nullptr;
        j["payload"] = nullptr;
        j["throughput"] = nullptr;
    }

    j["topics"] = ordered_json::object();
    for (const auto& [topic, st] : art.topic_stats)
        j["topics"][topic] = {{"publishes", st.publishes},
                              {"deliveries", st.deliveries},
                              {"drops", st.drops},
                              {"duplicates", st.duplicates}};

    j["finished_at_ms"] = art.finished_at_ms;
    j["quiescent"] = art.quiescent;
    return j.dump(2) + "\n";
}

void write_artifacts(const std::filesystem::path& out_dir, const RunProfile& profile,
                     const RunArtifacts& art) {
    std::filesystem::create_directories(out_dir);
    const auto variant =
        profile.mode == Mode::Psk ? metrics::Variant::Psk : metrics::Variant::Dsekp;
    metrics::write_client_csv(out_dir / "client_logs.csv", variant, art.client);
    metrics::write_server_csv(out_dir / "server_logs.csv", variant, art.server);

    std::ofstream summary(out_dir / "summary.json", std::ios::binary);
    if (!summary) throw std::runtime_error("cannot write summary.json");
    summary << summary_json(profile, art);

    std::ofstream trace(out_dir / "trace.jsonl", std::ios::binary);
    if (!trace) throw std::runtime_error("cannot write trace.jsonl");
    for (const auto& d : art.trace) {
        ordered_json j;
        j["at_ms"] = d.at_ms;
        j["topic"] = d.topic;
        j["source"] = d.source;
        j["body"] = d.body;
        trace << j.dump() << '\n';
    }

    std::ofstream sessions(out_dir / "sessions.json", std::ios::binary);
    if (!sessions) throw std::runtime_error("cannot write sessions.json");
    sessions << art.sessions_json << '\n';
}

}  // namespace dsekp::runner
