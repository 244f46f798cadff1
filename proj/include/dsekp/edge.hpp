#pragma once

// Receiver-side protocol engine. Holds the device registry (provisioned
// out of band), a bounded per-device session store, and the acceptance
// rules for handshakes and data packets.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dsekp/bytes.hpp"
#include "dsekp/crypto.hpp"
#include "dsekp/metrics.hpp"
#include "dsekp/wire.hpp"

namespace dsekp {

enum class InitReject {
    UnknownDevice,
    BadProof,
    StaleTimestamp,
    DuplicateCtr,
};

enum class DataReject {
    UnknownSession,  // no live session with that counter (never existed or evicted)
    Replay,          // seq not strictly above the session's high-water mark
    AuthFailure,     // tag or AAD mismatch
};

const char* to_string(InitReject r);
const char* to_string(DataReject r);

struct EdgeSession {
    crypto::SessionParams params;
    crypto::SessionSecret secret;
    uint64_t highest_seq = 0;  // strictly-increasing acceptance rule
    uint64_t established_at_ms = 0;
};

struct InitOutcome {
    wire::InitAck ack;                  // always ready to publish
    std::optional<InitReject> rejected;  // engaged on rejection
};

// Accepted packets yield a log row; `duplicate` marks a psk row whose
// sequence was seen before (the baseline cannot reject those).
struct DataOutcome {
    metrics::ServerLogRecord record;
    bool duplicate = false;
};

using DataResult = std::variant<DataOutcome, DataReject>;

class Edge {
  public:
    explicit Edge(uint32_t skew_window_s = 120, size_t session_capacity = 5);

    void register_device(const crypto::DeviceIdentity& identity);
    bool knows_device(const std::string& dev_id) const;

    // Verifies proof and timestamp, then installs the session (evicting
    // the oldest beyond capacity). Returns the ack to publish either way;
    // rejections carry status=rejected and no proof.
    InitOutcome handle_init(const wire::InitMessage& msg, uint64_t now_ms);

    // Session lookup, strict seq monotonicity, then AEAD open.
    DataResult handle_data(const wire::DsekpDataPacket& pkt, uint64_t now_ms);

    // Baseline path: fixed key, no sessions. Duplicate sequence numbers
    // are accepted and only flagged.
    DataResult handle_psk_data(const crypto::AesKey& key, const wire::PskDataPacket& pkt,
                               uint64_t now_ms);

    size_t session_count(const std::string& dev_id) const;

    // Live session counters for a device, most recent first.
    std::vector<uint16_t> session_ctrs(const std::string& dev_id) const;

    // Persistence stores public session parameters only; secrets are
    // re-derived from the registry on load and replay high-water marks
    // reset to zero.
    std::string sessions_to_json() const;  // single line
    void save_sessions(const std::filesystem::path& path) const;

    // Requires every stored dev_id to be registered; throws
    // std::runtime_error otherwise or on malformed input.
    void load_sessions(const std::filesystem::path& path);

  private:
    struct DeviceState {
        crypto::DeviceIdentity identity;
        std::deque<EdgeSession> sessions;  // front = most recent
        std::set<uint64_t> psk_seqs_seen;
    };

    EdgeSession* find_session(DeviceState& dev, uint16_t sess_ctr);
    void enforce_capacity(DeviceState& dev);

    uint32_t skew_window_s_;
    size_t session_capacity_;
    std::map<std::string, DeviceState> devices_;
};

}  // namespace dsekp
